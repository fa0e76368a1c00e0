#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qcdmdp/information.hpp"
#include "qcdmdp/mdp.hpp"

namespace qcdmdp {

enum class DetectorKind { shiryaev, sr, cusum, glr };

std::string_view to_string(DetectorKind kind);
DetectorKind detector_kind_from_string(std::string_view name);

/// An observed (s, a, s') triple.
struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
};

struct DetectorConfig {
  DetectorKind kind = DetectorKind::shiryaev;
  // Geometric prior parameter; shiryaev only. SR is shiryaev with rho = 0.
  double rho = 0.01;
  // CUSUM/GLR look-back: suffixes of length 1..window+1 are maximized over.
  std::size_t window = 200;
  double eps_prob = kDefaultEpsProb;
  // GLR: candidates closer than this to the pre-change parameter are excluded.
  double min_separation = 0.0;

  /// Throws ArgumentError when a field is outside its domain.
  void validate() const;
};

/// Running statistic of one detector.
///
/// Shiryaev and SR statistics are kept as log S_n (-inf encodes S_n = 0).
/// CUSUM and GLR statistics are already sums of log ratios and are kept as is;
/// before the first observation they are -inf.
class DetectorState {
 public:
  explicit DetectorState(DetectorKind kind = DetectorKind::shiryaev, std::size_t window = 200,
                         std::size_t candidates = 1);

  DetectorKind kind() const noexcept { return kind_; }
  std::size_t steps() const noexcept { return n_; }
  std::optional<std::size_t> stopped_at() const noexcept { return stopped_at_; }
  bool stopped() const noexcept { return stopped_at_.has_value(); }

  /// Value compared against thresholds: log S_n for shiryaev/sr, W_n / G_n otherwise.
  double level() const noexcept { return level_; }
  /// S_n / SR_n in natural units for shiryaev/sr, W_n / G_n for cusum/glr.
  double statistic() const;

  /// GLR: index of the candidate attaining the maximum at the last step.
  std::optional<std::size_t> best_candidate() const noexcept { return best_candidate_; }
  std::size_t candidates() const noexcept { return candidates_; }
  std::size_t window() const noexcept { return capacity_ - 1; }

  // In-place updates; the free *_step functions below wrap these.
  void update_shiryaev(double log_lr, double rho);
  void update_windowed(std::span<const double> candidate_log_lrs);

  /// First-passage check: records n as the stopping time when level > threshold_level.
  std::optional<std::size_t> check_level(double threshold_level);

 private:
  void require_running() const;

  DetectorKind kind_;
  double level_ = -std::numeric_limits<double>::infinity();
  std::size_t n_ = 0;
  std::optional<std::size_t> stopped_at_;
  std::optional<std::size_t> best_candidate_;

  // One ring of the last window+1 log ratios per candidate (cusum: one candidate).
  std::size_t candidates_;
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::vector<double> ring_;
};

/// log(max(T1(s,a,s'), eps) / max(T0(s,a,s'), eps)). Throws ArgumentError for infeasible (s,a).
double log_likelihood_ratio(const TabularMdp& pre, const TabularMdp& post, std::size_t s,
                            std::size_t a, std::size_t next, double eps_prob = kDefaultEpsProb);

/// Precomputed log_likelihood_ratio for every feasible (s, a, s') of a model pair.
class LogRatioTable {
 public:
  LogRatioTable(const TabularMdp& pre, const TabularMdp& post, double eps_prob = kDefaultEpsProb);

  double operator()(std::size_t s, std::size_t a, std::size_t next) const {
    return table_[(s * n_actions_ + a) * n_states_ + next];
  }
  double operator()(const Transition& t) const { return (*this)(t.state, t.action, t.next_state); }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> table_;
};

/// S_n = (1 + S_{n-1}) / (1 - rho) * lr. Throws ArgumentError for rho outside
/// [0,1) or lr < 0, StateError when the detector already stopped.
DetectorState shiryaev_step(DetectorState state, double lr, double rho);
DetectorState shiryaev_step_log(DetectorState state, double log_lr, double rho);

/// SR_n = (1 + SR_{n-1}) * lr.
DetectorState sr_step(DetectorState state, double lr);

/// W_n = max over suffixes of length 1..window+1 of the summed log ratios.
DetectorState cusum_step(DetectorState state, double log_lr);

/// G_n = max over suffixes and candidates; records the maximizing candidate.
DetectorState glr_step(DetectorState state, std::span<const double> candidate_log_lrs);
DetectorState glr_step(DetectorState state, const Transition& t, const TabularMdp& pre,
                       std::span<const TabularMdp> grid, double eps_prob = kDefaultEpsProb);

/// Comparison level of a threshold A: log A for shiryaev/sr, A for cusum/glr.
double threshold_level(DetectorKind kind, double threshold);

/// Stops the detector at the first n with statistic > A (strict). Idempotent.
std::optional<std::size_t> check_stop(DetectorState& state, double threshold);

/// Batch form sum_{k<=n} prior[k-1] prod_{i=k}^n lr_i, evaluated by log-sum-exp.
/// Returns the logarithm of the statistic (-inf when it is zero).
double shiryaev_batch_log(std::span<const double> prior, std::span<const double> log_lrs);
double shiryaev_batch(std::span<const double> prior, std::span<const double> log_lrs);

/// Geometric change-point pmf rho (1-rho)^{k-1}, k = 1..n.
std::vector<double> geometric_prior(double rho, std::size_t n);

/// Posterior probability that the change has happened, rho S / (1 + rho S).
double posterior_from_shiryaev(double statistic, double rho);
double posterior_from_log_shiryaev(double log_statistic, double rho);

}  // namespace qcdmdp
