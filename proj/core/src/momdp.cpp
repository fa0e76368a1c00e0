#include "qcdmdp/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "qcdmdp/error.hpp"

namespace qcdmdp {
namespace {

TabularMdp joint_model(const TabularMdp& pre, const TabularMdp& post,
                       const std::array<double, 4>& f) {
  const std::size_t n = pre.n_states();
  const std::size_t m = pre.n_actions();
  const std::size_t nx = 2 * n;
  std::vector<std::vector<std::size_t>> feasible(nx);
  std::vector<double> kernel(nx * m * nx, 0.0);
  std::vector<double> cost(nx * m, 0.0);
  const TabularMdp* regime[2] = {&pre, &post};
  for (std::size_t theta = 0; theta < 2; ++theta) {
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t x = s + theta * n;
      const auto actions = pre.feasible_actions(s);
      feasible[x].assign(actions.begin(), actions.end());
      for (std::size_t a : actions) {
        cost[x * m + a] = regime[theta]->cost(s, a);
        for (std::size_t theta_next = 0; theta_next < 2; ++theta_next) {
          const double switch_prob = f[theta * 2 + theta_next];
          for (std::size_t next = 0; next < n; ++next) {
            kernel[(x * m + a) * nx + next + theta_next * n] =
                regime[theta_next]->probability(s, a, next) * switch_prob;
          }
        }
      }
    }
  }
  return TabularMdp(nx, m, std::move(feasible), std::move(kernel), std::move(cost));
}

}  // namespace

RegimePomdp build_pomdp(const TabularMdp& pre, const TabularMdp& post, double rho) {
  require_same_spaces(pre, post);
  if (!(rho >= 0.0 && rho < 1.0)) throw ArgumentError("rho must lie in [0, 1)");
  // Regime 1 is absorbing: no change back once the change has happened.
  const std::array<double, 4> f{1.0 - rho, rho, 0.0, 1.0};
  return RegimePomdp{pre, post, rho, f, joint_model(pre, post, f)};
}

double belief_update(double belief, const Transition& t, const TabularMdp& pre,
                     const TabularMdp& post, double rho, double eps_prob) {
  if (!(belief >= 0.0 && belief <= 1.0)) throw ArgumentError("belief must lie in [0, 1]");
  if (!pre.is_feasible(t.state, t.action)) throw ArgumentError("belief_update: infeasible action");
  const double p1 = std::max(post.probability(t.state, t.action, t.next_state), eps_prob);
  const double p0 = std::max(pre.probability(t.state, t.action, t.next_state), eps_prob);
  const double changed = (belief + (1.0 - belief) * rho) * p1;
  const double unchanged = (1.0 - belief) * (1.0 - rho) * p0;
  const double total = changed + unchanged;
  if (!(total > 0.0)) {
    throw NumericalError("belief update normalizer vanished: transition impossible under both models");
  }
  return std::clamp(changed / total, 0.0, 1.0);
}

std::size_t BeliefGridPolicy::nearest(double belief) const {
  const double scaled = std::clamp(belief, 0.0, 1.0) * static_cast<double>(grid_size - 1);
  return static_cast<std::size_t>(std::lround(scaled));
}

double BeliefGridPolicy::value_at(std::size_t s, double belief) const {
  const double scaled = std::clamp(belief, 0.0, 1.0) * static_cast<double>(grid_size - 1);
  const auto lo = std::min(static_cast<std::size_t>(scaled), grid_size - 2);
  const double w = scaled - static_cast<double>(lo);
  const double* row = value.data() + s * grid_size;
  return (1.0 - w) * row[lo] + w * row[lo + 1];
}

BeliefGridPolicy belief_grid_solve(const RegimePomdp& pomdp, const BeliefGridOptions& options) {
  const std::size_t grid = options.grid_size;
  if (grid < 2) throw ArgumentError("belief grid needs at least 2 points");
  const double beta = options.beta;
  if (!(beta >= 0.0 && beta < 1.0)) throw ArgumentError("discount must lie in [0, 1)");
  if (!(options.tol > 0.0)) throw ArgumentError("tolerance must be positive");

  const TabularMdp& m0 = pomdp.pre;
  const TabularMdp& m1 = pomdp.post;
  const double rho = pomdp.rho;
  const std::size_t n = m0.n_states();

  // Flattened one-step model of every (s, g, a): expected cost plus a list of
  // (next cell, interpolation weight, probability) entries.
  struct Branch {
    std::uint32_t cell;  // s' * G + lo
    double weight_hi;
    double prob;
  };
  struct Choice {
    std::size_t action;
    double cost;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Branch> branches;
  std::vector<Choice> choices;
  std::vector<std::size_t> cell_begin(n * grid + 1, 0);

  BeliefGridPolicy out;
  out.n_states = n;
  out.grid_size = grid;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t g = 0; g < grid; ++g) {
      cell_begin[s * grid + g] = choices.size();
      const double b = out.grid_point(g);
      const double ahead = b + (1.0 - b) * rho;
      for (std::size_t a : m0.feasible_actions(s)) {
        Choice c{a, (1.0 - ahead) * m0.cost(s, a) + ahead * m1.cost(s, a), branches.size(), 0};
        for (std::size_t next = 0; next < n; ++next) {
          const double p = (1.0 - ahead) * m0.probability(s, a, next) + ahead * m1.probability(s, a, next);
          if (p <= 0.0) continue;
          const double b_next = belief_update(b, Transition{s, a, next}, m0, m1, rho, options.eps_prob);
          const double scaled = b_next * static_cast<double>(grid - 1);
          const auto lo = std::min(static_cast<std::size_t>(scaled), grid - 2);
          branches.push_back(Branch{static_cast<std::uint32_t>(next * grid + lo),
                                    scaled - static_cast<double>(lo), p});
        }
        c.end = branches.size();
        choices.push_back(c);
      }
    }
  }
  cell_begin[n * grid] = choices.size();

  std::vector<double> value(n * grid, 0.0);
  std::vector<double> next_value(n * grid, 0.0);
  std::vector<std::size_t> action(n * grid, 0);
  auto sweep = [&](const std::vector<double>& v, std::vector<double>& target) {
    double delta = 0.0;
    for (std::size_t cell = 0; cell < n * grid; ++cell) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = cell_begin[cell]; k < cell_begin[cell + 1]; ++k) {
        const Choice& c = choices[k];
        double expected = 0.0;
        for (std::size_t i = c.begin; i < c.end; ++i) {
          const Branch& br = branches[i];
          expected += br.prob * ((1.0 - br.weight_hi) * v[br.cell] + br.weight_hi * v[br.cell + 1]);
        }
        const double q = c.cost + beta * expected;
        if (q < best || (q == best && c.action < arg)) {
          best = q;
          arg = c.action;
        }
      }
      target[cell] = best;
      action[cell] = arg;
      delta = std::max(delta, std::abs(best - v[cell]));
    }
    return delta;
  };

  const double stop = beta > 0.0 ? options.tol / beta : std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const double delta = sweep(value, next_value);
    value.swap(next_value);
    if (delta <= stop) {
      // One more sweep yields greedy actions and the residual of `value`.
      out.residual = sweep(value, next_value);
      out.iterations = it;
      out.value = std::move(value);
      out.action = std::move(action);
      return out;
    }
  }
  throw NumericalError("belief grid value iteration did not converge in " +
                       std::to_string(options.max_iterations) + " sweeps");
}

MomdpController::MomdpController(const RegimePomdp& pomdp, const BeliefGridPolicy& policy,
                                 double eps_prob, double initial_belief)
    : pomdp_(&pomdp), policy_(&policy), eps_prob_(eps_prob), belief_(initial_belief) {
  if (policy.n_states != pomdp.n_observable()) {
    throw ArgumentError("belief policy does not match the pomdp state space");
  }
}

std::size_t MomdpController::step(std::size_t s, std::optional<Transition> feedback,
                                  std::size_t now) {
  if (now >= 1 && feedback) {
    belief_ = belief_update(belief_, *feedback, pomdp_->pre, pomdp_->post, pomdp_->rho, eps_prob_);
  }
  return policy_->action_at(s, belief_);
}

}  // namespace qcdmdp
