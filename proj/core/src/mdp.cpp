#include "qcdmdp/mdp.hpp"

#include <cmath>
#include <string>

#include "qcdmdp/error.hpp"

namespace qcdmdp {

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions,
                       std::vector<std::vector<std::size_t>> feasible_actions,
                       std::vector<double> kernel, std::vector<double> cost)
    : n_states_(n_states),
      n_actions_(n_actions),
      feasible_(std::move(feasible_actions)),
      feasible_mask_(n_states * n_actions, 0),
      kernel_(std::move(kernel)),
      cost_(std::move(cost)) {
  if (n_states_ == 0 || n_actions_ == 0) {
    throw ModelError("mdp needs at least one state and one action");
  }
  if (feasible_.size() != n_states_) {
    throw ModelError("feasible action lists must cover every state");
  }
  if (kernel_.size() != n_states_ * n_actions_ * n_states_) {
    throw ModelError("kernel size does not match states x actions x states");
  }
  if (cost_.size() != n_states_ * n_actions_) {
    throw ModelError("cost size does not match states x actions");
  }
  for (std::size_t s = 0; s < n_states_; ++s) {
    if (feasible_[s].empty()) {
      throw ModelError("state " + std::to_string(s) + " has no feasible action");
    }
    for (std::size_t a : feasible_[s]) {
      if (a >= n_actions_) {
        throw ModelError("action index " + std::to_string(a) + " out of range");
      }
      if (feasible_mask_[s * n_actions_ + a]) {
        throw ModelError("duplicate feasible action at state " + std::to_string(s));
      }
      feasible_mask_[s * n_actions_ + a] = 1;

      double total = 0.0;
      for (double p : transition(s, a)) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw ModelError("negative or non-finite transition probability at (" +
                           std::to_string(s) + ", " + std::to_string(a) + ")");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kStochasticTolerance) {
        throw ModelError("kernel row (" + std::to_string(s) + ", " + std::to_string(a) +
                         ") sums to " + std::to_string(total));
      }
      if (!std::isfinite(this->cost(s, a))) {
        throw ModelError("non-finite cost at (" + std::to_string(s) + ", " + std::to_string(a) +
                         ")");
      }
    }
  }
}

bool TabularMdp::is_feasible(std::size_t s, std::size_t a) const {
  return s < n_states_ && a < n_actions_ && feasible_mask_[s * n_actions_ + a] != 0;
}

bool TabularMdp::same_spaces(const TabularMdp& other) const {
  return n_states_ == other.n_states_ && n_actions_ == other.n_actions_ &&
         feasible_mask_ == other.feasible_mask_;
}

void validate_policy(const TabularMdp& mdp, const StationaryPolicy& policy) {
  if (policy.action.size() != mdp.n_states()) {
    throw ArgumentError("policy covers " + std::to_string(policy.action.size()) +
                        " states, mdp has " + std::to_string(mdp.n_states()));
  }
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    if (!mdp.is_feasible(s, policy.action[s])) {
      throw ArgumentError("policy action " + std::to_string(policy.action[s]) +
                          " is infeasible at state " + std::to_string(s));
    }
  }
}

void require_same_spaces(const TabularMdp& a, const TabularMdp& b) {
  if (!a.same_spaces(b)) {
    throw ModelError("models do not share state and action spaces");
  }
}

}  // namespace qcdmdp
