#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qcdmdp/detectors.hpp"
#include "qcdmdp/mdp.hpp"
#include "qcdmdp/random.hpp"

namespace qcdmdp {

/// pi_KL(s) = argmax_a KL(T1(s,a,.) || T0(s,a,.)), ties to the lowest action.
StationaryPolicy kl_policy(const TabularMdp& pre, const TabularMdp& post,
                           double eps_prob = kDefaultEpsProb);

/// argmax_a min_theta KL(T_theta(s,a,.) || T0(s,a,.)) over a candidate grid.
/// Throws ArgumentError for an empty grid.
StationaryPolicy worst_case_kl_policy(const TabularMdp& pre, std::span<const TabularMdp> grid,
                                      double eps_prob = kDefaultEpsProb);

/// Candidate models with their optimal policies, pairwise log-ratio tables and
/// per-model probing policies. Shared read-only by every controller of a run.
class ModelFamily {
 public:
  /// `parameters` may be empty (every other model then counts as separated);
  /// otherwise one vector per model, compared in Euclidean norm against
  /// `min_separation`.
  ModelFamily(std::vector<TabularMdp> models, std::vector<StationaryPolicy> optimal_policies,
              std::vector<std::vector<double>> parameters = {},
              double eps_prob = kDefaultEpsProb, double min_separation = 0.0);

  /// Convenience for the pre/post pair: index 0 is M0, index 1 is M1.
  static std::shared_ptr<const ModelFamily> pair(TabularMdp pre, TabularMdp post,
                                                 StationaryPolicy pi0, StationaryPolicy pi1,
                                                 double eps_prob = kDefaultEpsProb);

  std::size_t size() const noexcept { return models_.size(); }
  const TabularMdp& model(std::size_t i) const { return models_.at(i); }
  const StationaryPolicy& optimal_policy(std::size_t i) const { return optimal_.at(i); }
  /// Models at distance >= min_separation from model `pre`.
  const std::vector<std::size_t>& candidates(std::size_t pre) const { return candidates_.at(pre); }
  /// Probing policy when `pre` is the pre-change model (pi_KL for one candidate).
  const StationaryPolicy& probe_policy(std::size_t pre) const { return probe_.at(pre); }
  const LogRatioTable& log_ratios(std::size_t pre, std::size_t post) const;
  double eps_prob() const noexcept { return eps_prob_; }

 private:
  std::vector<TabularMdp> models_;
  std::vector<StationaryPolicy> optimal_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::vector<StationaryPolicy> probe_;
  std::vector<std::optional<LogRatioTable>> ratios_;  // size() x size(), diagonal empty
  double eps_prob_;
};

enum class ControllerKind { oracle, loc, kl, tt, random };
enum class Phase { pre, probe, post };

std::string_view to_string(ControllerKind kind);
std::string_view to_string(Phase phase);
ControllerKind controller_kind_from_string(std::string_view name);

inline constexpr std::size_t kNoChange = std::numeric_limits<std::size_t>::max();

struct ControllerConfig {
  ControllerKind kind = ControllerKind::tt;
  DetectorConfig detector;
  // Thresholds in statistic units (S_n for shiryaev/sr, W_n / G_n for cusum/glr).
  double threshold_a = std::numeric_limits<double>::infinity();
  double threshold_b = 0.0;
  // Oracle only: the true change point.
  std::size_t oracle_gamma = kNoChange;
};

/// Returns `config` with the kind's implied threshold: loc forces B = A, kl forces B = 0.
ControllerConfig normalized(ControllerConfig config);

/// Per-episode state machine choosing actions from (state, last transition).
///
/// Phases follow the two-threshold rule: statistic <= B plays the pre-change
/// optimal policy, B < statistic <= A plays the probing policy, and the first
/// statistic > A switches permanently to the optimal policy of the detected
/// model. The transition fed at time `now` updates the detector before the
/// action for `now` is chosen. After the switch the detector is frozen.
class SwitchController {
 public:
  SwitchController(std::shared_ptr<const ModelFamily> family, ControllerConfig config,
                   Engine policy_rng = Engine{}, std::size_t pre_index = 0);

  /// Throws StateError when B > A, ArgumentError when feedback is missing for now >= 1.
  std::size_t step(std::size_t s, std::optional<Transition> feedback, std::size_t now);

  Phase phase() const noexcept { return phase_; }
  const DetectorState& detector() const noexcept { return detector_; }
  const ControllerConfig& config() const noexcept { return config_; }
  std::size_t pre_index() const noexcept { return pre_; }
  /// Time of the absorbing switch, if it happened.
  std::optional<std::size_t> switch_time() const noexcept { return switch_time_; }
  /// Model whose optimal policy is played after the switch.
  std::optional<std::size_t> detected_model() const noexcept { return detected_; }
  const std::shared_ptr<const ModelFamily>& family() const noexcept { return family_; }

 private:
  std::size_t random_action(std::size_t s);

  std::shared_ptr<const ModelFamily> family_;
  ControllerConfig config_;
  std::size_t pre_;
  std::vector<std::size_t> candidates_;
  std::vector<const LogRatioTable*> ratios_;
  std::vector<double> scratch_;
  double level_a_;
  double level_b_;
  DetectorState detector_;
  Phase phase_ = Phase::pre;
  std::optional<std::size_t> switch_time_;
  std::optional<std::size_t> detected_;
  Engine rng_;
};

/// Restarts monitoring with the detected model as the new pre-change model:
/// its optimal policy becomes pi_0 and the detector starts from zero.
/// Throws StateError when the controller has not switched yet.
SwitchController glr_reset(const SwitchController& ctrl,
                           std::optional<std::size_t> theta_hat = std::nullopt);

}  // namespace qcdmdp
