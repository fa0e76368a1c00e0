#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library code it is compared against.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qcdmdp/mdp.hpp"

namespace oracle {

using qcdmdp::StationaryPolicy;
using qcdmdp::TabularMdp;

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t n, bool allow_zeros = false) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::bernoulli_distribution zero(0.25);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& x : p) {
    x = allow_zeros && zero(rng) ? 0.0 : u(rng);
    total += x;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& x : p) x /= total;
  return p;
}

/// Random model; every state gets a random nonempty subset of actions when
/// `partial` is set, otherwise every action is feasible.
inline TabularMdp random_mdp(std::mt19937_64& rng, std::size_t n, std::size_t m,
                             bool partial = false, bool sparse = false) {
  std::vector<std::vector<std::size_t>> feasible(n);
  std::bernoulli_distribution keep(0.6);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      if (!partial || keep(rng)) feasible[s].push_back(a);
    }
    if (feasible[s].empty()) feasible[s].push_back(std::uniform_int_distribution<std::size_t>(0, m - 1)(rng));
  }
  std::vector<double> kernel(n * m * n, 0.0), cost(n * m, 0.0);
  std::uniform_real_distribution<double> c(0.0, 10.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a : feasible[s]) {
      const auto row = random_pmf(rng, n, sparse);
      std::copy(row.begin(), row.end(), kernel.begin() + static_cast<std::ptrdiff_t>((s * m + a) * n));
      cost[s * m + a] = c(rng);
    }
  }
  return TabularMdp(n, m, std::move(feasible), std::move(kernel), std::move(cost));
}

/// Same spaces and costs as `base`, fresh kernel rows.
inline TabularMdp perturbed_kernel(std::mt19937_64& rng, const TabularMdp& base, bool sparse = false) {
  const std::size_t n = base.n_states(), m = base.n_actions();
  std::vector<std::vector<std::size_t>> feasible(n);
  std::vector<double> kernel(n * m * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto acts = base.feasible_actions(s);
    feasible[s].assign(acts.begin(), acts.end());
    for (std::size_t a : acts) {
      const auto row = random_pmf(rng, n, sparse);
      std::copy(row.begin(), row.end(), kernel.begin() + static_cast<std::ptrdiff_t>((s * m + a) * n));
    }
  }
  return TabularMdp(n, m, std::move(feasible), std::move(kernel), base.cost_data());
}

inline StationaryPolicy random_policy(std::mt19937_64& rng, const TabularMdp& mdp) {
  StationaryPolicy pi;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto acts = mdp.feasible_actions(s);
    pi.action.push_back(acts[std::uniform_int_distribution<std::size_t>(0, acts.size() - 1)(rng)]);
  }
  return pi;
}

/// Every deterministic stationary policy.
inline std::vector<StationaryPolicy> all_policies(const TabularMdp& mdp) {
  std::vector<StationaryPolicy> out{StationaryPolicy{}};
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    std::vector<StationaryPolicy> next;
    for (const auto& partial : out) {
      for (std::size_t a : mdp.feasible_actions(s)) {
        auto p = partial;
        p.action.push_back(a);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline Eigen::MatrixXd policy_matrix(const TabularMdp& mdp, const StationaryPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < n; ++t) {
      p(s, t) = mdp.probability(static_cast<std::size_t>(s), pi(static_cast<std::size_t>(s)),
                                static_cast<std::size_t>(t));
    }
  }
  return p;
}

/// (I - beta P_pi)^{-1} c_pi by dense LU.
inline std::vector<double> direct_value(const TabularMdp& mdp, const StationaryPolicy& pi, double beta) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  const Eigen::MatrixXd p = policy_matrix(mdp, pi);
  Eigen::VectorXd c(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    c(s) = mdp.cost(static_cast<std::size_t>(s), pi(static_cast<std::size_t>(s)));
  }
  const Eigen::VectorXd v = (Eigen::MatrixXd::Identity(n, n) - beta * p).fullPivLu().solve(c);
  return {v.data(), v.data() + n};
}

/// Invariant distribution as the Cesaro average of the chain started uniform.
inline std::vector<double> cesaro_distribution(const TabularMdp& mdp, const StationaryPolicy& pi,
                                               std::size_t steps = 200000) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  const Eigen::MatrixXd p = policy_matrix(mdp, pi);
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(n);
  for (std::size_t k = 0; k < steps; ++k) {
    sum += x;
    x = x * p;
  }
  sum /= static_cast<double>(steps);
  return {sum.data(), sum.data() + n};
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q, double eps = 1e-12) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) d += p[i] * std::log(std::max(p[i], eps) / std::max(q[i], eps));
  }
  return std::max(d, 0.0);
}

inline std::vector<double> row(const TabularMdp& mdp, std::size_t s, std::size_t a) {
  const auto r = mdp.transition(s, a);
  return {r.begin(), r.end()};
}

/// Invariant distribution from the square system with one balance equation
/// replaced by sum(mu) = 1. Needs an irreducible chain.
inline std::vector<double> balance_distribution(const TabularMdp& mdp, const StationaryPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states());
  Eigen::MatrixXd m = policy_matrix(mdp, pi).transpose() - Eigen::MatrixXd::Identity(n, n);
  m.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd mu = m.fullPivLu().solve(rhs);
  return {mu.data(), mu.data() + n};
}

inline double info_exact(const TabularMdp& pre, const TabularMdp& post, const StationaryPolicy& pi) {
  const auto mu = balance_distribution(post, pi);
  double total = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) total += mu[s] * kl(row(post, s, pi(s)), row(pre, s, pi(s)));
  return total;
}

/// Average KL reward of `pi` from the Cesaro distribution.
inline double info_by_averaging(const TabularMdp& pre, const TabularMdp& post,
                                const StationaryPolicy& pi) {
  const auto mu = cesaro_distribution(post, pi);
  double total = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    total += mu[s] * kl(row(post, s, pi(s)), row(pre, s, pi(s)));
  }
  return total;
}

/// Shiryaev recursion in natural units.
inline double shiryaev_plain(const std::vector<double>& lrs, double rho) {
  double s = 0.0;
  for (double lr : lrs) s = (1.0 + s) / (1.0 - rho) * lr;
  return s;
}

/// Double sum/product form with an arbitrary prior, in natural units.
inline double batch_plain(const std::vector<double>& prior, const std::vector<double>& lrs) {
  double total = 0.0;
  for (std::size_t k = 0; k < lrs.size(); ++k) {
    double prod = prior[k];
    for (std::size_t i = k; i < lrs.size(); ++i) prod *= lrs[i];
    total += prod;
  }
  return total;
}

/// max over suffixes of length 1..window+1.
inline double suffix_max(const std::vector<double>& xs, std::size_t window) {
  double best = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t len = 1; len <= std::min(xs.size(), window + 1); ++len) {
    sum += xs[xs.size() - len];
    best = std::max(best, sum);
  }
  return best;
}

/// P(change has occurred by transition n | trajectory) by enumerating every
/// change index k in {1..n} and "later", with prior rho(1-rho)^{k-1}.
/// Transition i (1-based) is drawn from M1 iff i >= k.
struct Step {
  std::size_t s, a, next;
};
inline double exhaustive_posterior(const std::vector<Step>& steps, const TabularMdp& pre,
                                   const TabularMdp& post, double rho, double eps = 1e-12) {
  const std::size_t n = steps.size();
  auto prob = [&](const TabularMdp& m, const Step& st) {
    return std::max(m.probability(st.s, st.a, st.next), eps);
  };
  std::vector<double> joint(n + 1);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    double w = k <= n ? rho * std::pow(1.0 - rho, static_cast<double>(k - 1))
                      : std::pow(1.0 - rho, static_cast<double>(n));
    for (std::size_t i = 1; i <= n; ++i) w *= prob(i >= k ? post : pre, steps[i - 1]);
    joint[k - 1] = w;
  }
  double changed = 0.0, total = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    total += joint[k];
    if (k < n) changed += joint[k];
  }
  return changed / total;
}

}  // namespace oracle
