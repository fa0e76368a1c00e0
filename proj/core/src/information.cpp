#include "qcdmdp/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcdmdp/error.hpp"
#include "qcdmdp/solvers.hpp"

namespace qcdmdp {

double kl_step(std::span<const double> p, std::span<const double> q, double eps_prob) {
  if (p.size() != q.size()) {
    throw ArgumentError("kl_step: distributions have different lengths");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw ArgumentError("kl_step: negative probability");
    if (p[i] == 0.0) continue;
    total += p[i] * (std::log(std::max(p[i], eps_prob)) - std::log(std::max(q[i], eps_prob)));
  }
  return std::max(0.0, total);
}

double transition_kl(const TabularMdp& pre, const TabularMdp& post, std::size_t s,
                     std::size_t a, double eps_prob) {
  return kl_step(post.transition(s, a), pre.transition(s, a), eps_prob);
}

double info_number(const TabularMdp& pre, const TabularMdp& post, const StationaryPolicy& policy,
                   double eps_prob) {
  require_same_spaces(pre, post);
  validate_policy(post, policy);
  std::vector<double> kl(post.n_states());
  bool all_zero = true;
  for (std::size_t s = 0; s < kl.size(); ++s) {
    kl[s] = transition_kl(pre, post, s, policy(s), eps_prob);
    all_zero = all_zero && kl[s] == 0.0;
  }
  // A zero reward averages to zero from any start, unichain or not.
  if (all_zero) return 0.0;
  const auto mu = stationary_distribution(post, policy);
  double total = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    if (mu[s] > 0.0) total += mu[s] * kl[s];
  }
  return total;
}

MaxInfoResult max_info_number(const TabularMdp& pre, const TabularMdp& post,
                              const MaxInfoOptions& options) {
  require_same_spaces(pre, post);
  if (!(options.tol > 0.0)) throw ArgumentError("max_info_number: tol must be positive");

  const std::size_t n = post.n_states();
  const std::size_t m = post.n_actions();
  constexpr double kSelfLoop = 0.5;

  std::vector<double> reward(n * m, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a : post.feasible_actions(s)) {
      reward[s * m + a] = transition_kl(pre, post, s, a, options.eps_prob);
    }
  }

  auto q_value = [&](std::size_t s, std::size_t a, const std::vector<double>& h) {
    double expected = 0.0;
    const auto row = post.transition(s, a);
    for (std::size_t next = 0; next < n; ++next) expected += row[next] * h[next];
    return reward[s * m + a] + kSelfLoop * h[s] + (1.0 - kSelfLoop) * expected;
  };
  auto best = [&](std::size_t s, const std::vector<double>& h) {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t arg = m;
    for (std::size_t a : post.feasible_actions(s)) {
      const double q = q_value(s, a, h);
      if (q > value || (q == value && a < arg)) {
        value = q;
        arg = a;
      }
    }
    return std::pair{value, arg};
  };

  std::vector<double> h(n, 0.0);
  std::vector<double> w(n, 0.0);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < n; ++s) {
      w[s] = best(s, h).first;
      lo = std::min(lo, w[s] - h[s]);
      hi = std::max(hi, w[s] - h[s]);
    }
    const double ref = w[0];
    for (std::size_t s = 0; s < n; ++s) h[s] = w[s] - ref;
    if (hi - lo <= options.tol) {
      MaxInfoResult out;
      out.value = 0.5 * (hi + lo);
      out.iterations = it;
      out.policy.action.resize(n);
      for (std::size_t s = 0; s < n; ++s) out.policy.action[s] = best(s, h).second;
      return out;
    }
  }
  throw NumericalError("relative value iteration did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
}

}  // namespace qcdmdp
