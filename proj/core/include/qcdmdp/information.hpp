#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qcdmdp/mdp.hpp"

namespace qcdmdp {

/// Probabilities are floored at this value wherever they enter a logarithm.
inline constexpr double kDefaultEpsProb = 1e-12;

/// Relative entropy sum p log(p/q) in nats, with 0 log 0 = 0.
///
/// Both p and q are floored at `eps_prob` inside the log ratio only; the result
/// is clamped at zero. Throws ArgumentError on length mismatch or negative entries.
double kl_step(std::span<const double> p, std::span<const double> q,
               double eps_prob = kDefaultEpsProb);

/// One-step divergence KL(T1(s,a,.) || T0(s,a,.)).
double transition_kl(const TabularMdp& pre, const TabularMdp& post, std::size_t s,
                     std::size_t a, double eps_prob = kDefaultEpsProb);

/// Long-run average log-likelihood ratio under the post-change law:
/// sum_s mu(s) KL(T1(s,pi(s),.) || T0(s,pi(s),.)), mu the invariant
/// distribution of pi on the post-change kernel.
double info_number(const TabularMdp& pre, const TabularMdp& post, const StationaryPolicy& policy,
                   double eps_prob = kDefaultEpsProb);

struct MaxInfoOptions {
  double tol = 1e-8;
  std::size_t max_iterations = 1'000'000;
  double eps_prob = kDefaultEpsProb;
};

struct MaxInfoResult {
  double value = 0.0;
  StationaryPolicy policy;
  std::size_t iterations = 0;
};

/// I_max: best average KL reward over stationary deterministic policies.
///
/// Relative value iteration on the average-reward MDP with dynamics `post`
/// and reward KL(T1(s,a,.) || T0(s,a,.)). An aperiodicity transform (self-loop
/// weight 1/2) is applied; it leaves the optimal gain unchanged.
MaxInfoResult max_info_number(const TabularMdp& pre, const TabularMdp& post,
                              const MaxInfoOptions& options = {});

}  // namespace qcdmdp
