#include "qcdmdp/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcdmdp/error.hpp"

namespace qcdmdp {
namespace {

void check_discount(double beta, double tol) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ArgumentError("discount must lie in [0, 1), got " + std::to_string(beta));
  }
  if (!(tol > 0.0)) {
    throw ArgumentError("tolerance must be positive, got " + std::to_string(tol));
  }
}

double q_value(const TabularMdp& mdp, std::size_t s, std::size_t a,
               const std::vector<double>& value, double beta) {
  double expected = 0.0;
  const auto row = mdp.transition(s, a);
  for (std::size_t next = 0; next < row.size(); ++next) {
    expected += row[next] * value[next];
  }
  return mdp.cost(s, a) + beta * expected;
}

// Returns (min q, argmin) with ties to the lowest index.
std::pair<double, std::size_t> best_action(const TabularMdp& mdp, std::size_t s,
                                           const std::vector<double>& value, double beta) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = mdp.n_actions();
  for (std::size_t a : mdp.feasible_actions(s)) {
    const double q = q_value(mdp, s, a, value, beta);
    if (q < best || (q == best && a < arg)) {
      best = q;
      arg = a;
    }
  }
  return {best, arg};
}

double sup_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace

Solution value_iteration(const TabularMdp& mdp, double beta, double tol,
                         const SolverOptions& options) {
  check_discount(beta, tol);
  const std::size_t n = mdp.n_states();
  std::vector<double> value(n, 0.0);
  std::vector<double> next(n, 0.0);

  Solution out;
  // ||T V_{k+1} - V_{k+1}|| <= beta ||V_{k+1} - V_k||, so stopping once the
  // sweep delta reaches tol / beta bounds the returned residual by tol.
  const double stop = beta > 0.0 ? tol / beta : std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t s = 0; s < n; ++s) next[s] = best_action(mdp, s, value, beta).first;
    const double delta = sup_distance(next, value);
    value.swap(next);
    if (options.record_sweeps) out.sweep_deltas.push_back(delta);
    if (delta <= stop) {
      out.iterations = it;
      out.value.value = std::move(value);
      out.policy = greedy_policy(mdp, out.value, beta);
      out.residual = bellman_residual(mdp, out.value, beta);
      return out;
    }
  }
  throw NumericalError("value iteration did not converge in " +
                       std::to_string(options.max_iterations) + " sweeps");
}

ValueFunction policy_evaluation(const TabularMdp& mdp, const StationaryPolicy& policy,
                                double beta, double tol, const SolverOptions& options) {
  check_discount(beta, tol);
  validate_policy(mdp, policy);
  const std::size_t n = mdp.n_states();
  std::vector<double> value(n, 0.0);
  std::vector<double> next(n, 0.0);
  const double stop = beta > 0.0 ? tol / beta : std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t s = 0; s < n; ++s) next[s] = q_value(mdp, s, policy(s), value, beta);
    const double delta = sup_distance(next, value);
    value.swap(next);
    if (delta <= stop) return ValueFunction{std::move(value)};
  }
  throw NumericalError("policy evaluation did not converge in " +
                       std::to_string(options.max_iterations) + " sweeps");
}

StationaryPolicy greedy_policy(const TabularMdp& mdp, const ValueFunction& value, double beta) {
  StationaryPolicy policy;
  policy.action.resize(mdp.n_states());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    policy.action[s] = best_action(mdp, s, value.value, beta).second;
  }
  return policy;
}

double bellman_residual(const TabularMdp& mdp, const ValueFunction& value, double beta) {
  double r = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    r = std::max(r, std::abs(value(s) - best_action(mdp, s, value.value, beta).first));
  }
  return r;
}

std::vector<double> stationary_distribution(const TabularMdp& mdp,
                                            const StationaryPolicy& policy) {
  validate_policy(mdp, policy);
  const auto n = static_cast<Eigen::Index>(mdp.n_states());

  // Stack (P^T - I) mu = 0 with the normalization row 1^T mu = 1.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 1, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto row = mdp.transition(static_cast<std::size_t>(s), policy(static_cast<std::size_t>(s)));
    for (Eigen::Index next = 0; next < n; ++next) system(next, s) += row[static_cast<std::size_t>(next)];
    system(s, s) -= 1.0;
  }
  system.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
  qr.setThreshold(1e-10);
  if (qr.rank() < n) {
    throw NumericalError("policy-induced chain has no unique stationary distribution (rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(n) + ")");
  }
  const Eigen::VectorXd mu = qr.solve(rhs);
  const double residual = (system * mu - rhs).lpNorm<Eigen::Infinity>();
  if (residual > 1e-9 || mu.minCoeff() < -1e-9) {
    throw NumericalError("stationary distribution solve failed, residual " +
                         std::to_string(residual));
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < n; ++s) out[static_cast<std::size_t>(s)] = std::max(0.0, mu(s));
  return out;
}

}  // namespace qcdmdp
