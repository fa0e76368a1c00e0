#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcdmdp {

/// Tolerance on kernel row sums accepted by TabularMdp.
inline constexpr double kStochasticTolerance = 1e-9;

/// A finite MDP with per-step costs (to be minimized).
///
/// Actions share one global index space [0, n_actions); each state lists the
/// subset it admits. Kernel rows and costs of infeasible pairs are unused and
/// stored as zero. The object is immutable after construction.
class TabularMdp {
 public:
  /// `kernel` is laid out (state, action, next_state) row-major and `cost`
  /// (state, action). Throws ModelError when any invariant fails.
  TabularMdp(std::size_t n_states, std::size_t n_actions,
             std::vector<std::vector<std::size_t>> feasible_actions,
             std::vector<double> kernel, std::vector<double> cost);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  std::span<const std::size_t> feasible_actions(std::size_t s) const {
    return feasible_[s];
  }
  bool is_feasible(std::size_t s, std::size_t a) const;

  /// Distribution over next states for (s, a).
  std::span<const double> transition(std::size_t s, std::size_t a) const {
    return {kernel_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  double probability(std::size_t s, std::size_t a, std::size_t next) const {
    return kernel_[(s * n_actions_ + a) * n_states_ + next];
  }
  double cost(std::size_t s, std::size_t a) const { return cost_[s * n_actions_ + a]; }

  /// True when both models have the same states, actions and feasibility sets.
  bool same_spaces(const TabularMdp& other) const;

  const std::vector<double>& kernel_data() const noexcept { return kernel_; }
  const std::vector<double>& cost_data() const noexcept { return cost_; }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<std::vector<std::size_t>> feasible_;
  std::vector<char> feasible_mask_;
  std::vector<double> kernel_;
  std::vector<double> cost_;
};

/// Deterministic stationary policy: one action index per state.
struct StationaryPolicy {
  std::vector<std::size_t> action;

  std::size_t operator()(std::size_t s) const { return action[s]; }
  bool operator==(const StationaryPolicy&) const = default;
};

/// Per-state discounted expected cost.
struct ValueFunction {
  std::vector<double> value;

  double operator()(std::size_t s) const { return value[s]; }
};

/// Throws ArgumentError unless `policy` covers every state with a feasible action.
void validate_policy(const TabularMdp& mdp, const StationaryPolicy& policy);

/// Throws ModelError unless the two models share state/action spaces.
void require_same_spaces(const TabularMdp& a, const TabularMdp& b);

}  // namespace qcdmdp
