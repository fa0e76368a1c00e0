#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "qcdmdp/detectors.hpp"
#include "qcdmdp/information.hpp"
#include "qcdmdp/mdp.hpp"

namespace qcdmdp {

/// Two-regime POMDP over X = S x {0, 1}; the regime index is latent and the
/// observation is the MDP state itself.
///
/// Joint states are indexed x = s + theta * |S|. The regime switches 0 -> 1
/// with probability rho per step and regime 1 is absorbing. The next regime
/// drives the transition into s'.
struct RegimePomdp {
  TabularMdp pre;
  TabularMdp post;
  double rho = 0.0;
  // F(theta' | theta), row-major [theta][theta'].
  std::array<double, 4> model_transition{};
  // Kernel and cost over the joint state space.
  TabularMdp joint;

  std::size_t n_observable() const { return pre.n_states(); }
  /// omega(o | x', a): 1 iff o equals the observable part of x'.
  double observation(std::size_t o, std::size_t joint_next) const {
    return o == joint_next % pre.n_states() ? 1.0 : 0.0;
  }
};

/// Builds the joint model. Throws ModelError when M0 and M1 differ in spaces,
/// ArgumentError for rho outside [0, 1).
RegimePomdp build_pomdp(const TabularMdp& pre, const TabularMdp& post, double rho);

/// Bayes filter on the regime posterior b = P(last transition came from M1):
///   b' = (b + (1-b) rho) T1 / [(b + (1-b) rho) T1 + (1-b)(1-rho) T0].
/// Kernel values are floored at eps_prob exactly as in the detectors. Throws
/// NumericalError if the normalizer vanishes (possible only with eps_prob = 0).
double belief_update(double belief, const Transition& t, const TabularMdp& pre,
                     const TabularMdp& post, double rho, double eps_prob = kDefaultEpsProb);

struct BeliefGridOptions {
  std::size_t grid_size = 201;
  double beta = 0.99;
  double tol = 1e-6;
  std::size_t max_iterations = 1'000'000;
  double eps_prob = kDefaultEpsProb;
};

/// Value function and greedy actions on S x {b_0, ..., b_{G-1}}, b_g = g / (G-1).
struct BeliefGridPolicy {
  std::size_t n_states = 0;
  std::size_t grid_size = 0;
  std::vector<double> value;          // [s * G + g]
  std::vector<std::size_t> action;    // [s * G + g]
  std::size_t iterations = 0;
  double residual = 0.0;

  double grid_point(std::size_t g) const {
    return static_cast<double>(g) / static_cast<double>(grid_size - 1);
  }
  std::size_t nearest(double belief) const;
  std::size_t action_at(std::size_t s, double belief) const { return action[s * grid_size + nearest(belief)]; }
  /// Linear interpolation of the value in the belief coordinate.
  double value_at(std::size_t s, double belief) const;
};

/// Grid value iteration for the belief MDP. At belief b the current step runs
/// under M1 with probability b + (1-b) rho (cost and transition alike); the
/// next value is interpolated linearly between the two neighbouring grid points.
/// Throws ArgumentError for grid_size < 2, NumericalError on non-convergence.
BeliefGridPolicy belief_grid_solve(const RegimePomdp& pomdp, const BeliefGridOptions& options);

/// Runtime controller playing a solved belief-grid policy.
class MomdpController {
 public:
  MomdpController(const RegimePomdp& pomdp, const BeliefGridPolicy& policy,
                  double eps_prob = kDefaultEpsProb, double initial_belief = 0.0);

  /// Applies the belief update for `feedback` (if any), then the policy at the
  /// nearest grid point.
  std::size_t step(std::size_t s, std::optional<Transition> feedback, std::size_t now);
  double belief() const noexcept { return belief_; }

 private:
  const RegimePomdp* pomdp_;
  const BeliefGridPolicy* policy_;
  double eps_prob_;
  double belief_;
};

}  // namespace qcdmdp
