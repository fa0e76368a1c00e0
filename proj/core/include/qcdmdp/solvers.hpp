#pragma once

#include <cstddef>
#include <vector>

#include "qcdmdp/mdp.hpp"

namespace qcdmdp {

struct SolverOptions {
  std::size_t max_iterations = 1'000'000;
  // Keep the sup-norm change of every sweep in Solution::sweep_deltas.
  bool record_sweeps = false;
};

struct Solution {
  ValueFunction value;
  StationaryPolicy policy;
  std::size_t iterations = 0;
  // Bellman residual of the returned value function.
  double residual = 0.0;
  std::vector<double> sweep_deltas;
};

/// Discounted cost-minimizing value iteration.
///
/// Iterates V <- min_a [C + beta T V] from V = 0 until the returned V has
/// Bellman residual at most `tol`. The policy is greedy with respect to the
/// returned V, ties resolved to the lowest action index.
///
/// Throws ArgumentError for beta outside [0,1) or tol <= 0, NumericalError
/// when max_iterations is exhausted.
Solution value_iteration(const TabularMdp& mdp, double beta, double tol,
                         const SolverOptions& options = {});

/// Fixed point of the policy Bellman operator, accurate to `tol` in residual.
ValueFunction policy_evaluation(const TabularMdp& mdp, const StationaryPolicy& policy,
                                double beta, double tol, const SolverOptions& options = {});

/// Greedy (cost-minimizing) policy for a given value function.
StationaryPolicy greedy_policy(const TabularMdp& mdp, const ValueFunction& value, double beta);

/// Sup-norm Bellman residual max_s |V(s) - min_a [C + beta T V](s)|.
double bellman_residual(const TabularMdp& mdp, const ValueFunction& value, double beta);

/// Invariant distribution of the chain induced by `policy` on `mdp`'s kernel.
///
/// Throws NumericalError when the chain has no unique invariant distribution
/// (the message carries the residual / rank information).
std::vector<double> stationary_distribution(const TabularMdp& mdp, const StationaryPolicy& policy);

}  // namespace qcdmdp
