#include "qcdmdp/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcdmdp/error.hpp"

namespace qcdmdp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x), exact at x = -inf.
double softplus(double x) {
  if (x == kNegInf) return 0.0;
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw ArgumentError("rho must lie in [0, 1), got " + std::to_string(rho));
  }
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::shiryaev: return "shiryaev";
    case DetectorKind::sr: return "sr";
    case DetectorKind::cusum: return "cusum";
    case DetectorKind::glr: return "glr";
  }
  return "unknown";
}

DetectorKind detector_kind_from_string(std::string_view name) {
  if (name == "shiryaev") return DetectorKind::shiryaev;
  if (name == "sr") return DetectorKind::sr;
  if (name == "cusum") return DetectorKind::cusum;
  if (name == "glr") return DetectorKind::glr;
  throw ArgumentError("unknown detector kind '" + std::string(name) + "'");
}

void DetectorConfig::validate() const {
  check_rho(rho);
  if (kind == DetectorKind::shiryaev && rho <= 0.0) {
    throw ArgumentError("shiryaev detector requires rho > 0 (use sr for rho = 0)");
  }
  if ((kind == DetectorKind::cusum || kind == DetectorKind::glr) && window < 1) {
    throw ArgumentError("cusum/glr window must be at least 1");
  }
  if (!(eps_prob >= 0.0 && eps_prob < 1.0)) {
    throw ArgumentError("eps_prob must lie in [0, 1)");
  }
  if (min_separation < 0.0) throw ArgumentError("min_separation must be non-negative");
}

DetectorState::DetectorState(DetectorKind kind, std::size_t window, std::size_t candidates)
    : kind_(kind), candidates_(candidates), capacity_(window + 1) {
  if (kind == DetectorKind::cusum || kind == DetectorKind::glr) {
    if (window < 1) throw ArgumentError("detector window must be at least 1");
    if (candidates < 1) throw ArgumentError("glr needs at least one candidate");
    if (kind == DetectorKind::cusum && candidates != 1) {
      throw ArgumentError("cusum tracks exactly one post-change model");
    }
    ring_.assign(candidates_ * capacity_, 0.0);
  }
}

double DetectorState::statistic() const {
  if (kind_ == DetectorKind::shiryaev || kind_ == DetectorKind::sr) return std::exp(level_);
  return level_;
}

void DetectorState::require_running() const {
  if (stopped_at_) {
    throw StateError("detector already stopped at n = " + std::to_string(*stopped_at_));
  }
}

void DetectorState::update_shiryaev(double log_lr, double rho) {
  check_rho(rho);
  require_running();
  if (kind_ != DetectorKind::shiryaev && kind_ != DetectorKind::sr) {
    throw StateError("recursive update applied to a windowed detector");
  }
  if (std::isnan(log_lr)) throw ArgumentError("likelihood ratio is NaN");
  level_ = log_lr == kNegInf ? kNegInf : softplus(level_) - std::log1p(-rho) + log_lr;
  ++n_;
}

void DetectorState::update_windowed(std::span<const double> candidate_log_lrs) {
  require_running();
  if (kind_ != DetectorKind::cusum && kind_ != DetectorKind::glr) {
    throw StateError("windowed update applied to a recursive detector");
  }
  if (candidate_log_lrs.size() != candidates_) {
    throw ArgumentError("expected " + std::to_string(candidates_) + " log ratios, got " +
                        std::to_string(candidate_log_lrs.size()));
  }
  for (std::size_t c = 0; c < candidates_; ++c) ring_[c * capacity_ + head_] = candidate_log_lrs[c];
  head_ = (head_ + 1) % capacity_;
  filled_ = std::min(filled_ + 1, capacity_);
  ++n_;

  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t c = 0; c < candidates_; ++c) {
    const double* ring = ring_.data() + c * capacity_;
    double sum = 0.0;
    std::size_t idx = head_;
    for (std::size_t len = 1; len <= filled_; ++len) {
      idx = idx == 0 ? capacity_ - 1 : idx - 1;
      sum += ring[idx];
      if (sum > best) {
        best = sum;
        arg = c;
      }
    }
  }
  level_ = best;
  best_candidate_ = arg;
}

std::optional<std::size_t> DetectorState::check_level(double threshold_level) {
  if (!stopped_at_ && n_ >= 1 && level_ > threshold_level) stopped_at_ = n_;
  return stopped_at_;
}

double log_likelihood_ratio(const TabularMdp& pre, const TabularMdp& post, std::size_t s,
                            std::size_t a, std::size_t next, double eps_prob) {
  if (!pre.is_feasible(s, a) || !post.is_feasible(s, a)) {
    throw ArgumentError("transition (" + std::to_string(s) + ", " + std::to_string(a) +
                        ") is infeasible");
  }
  if (next >= pre.n_states() || next >= post.n_states()) {
    throw ArgumentError("next state " + std::to_string(next) + " out of range");
  }
  return std::log(std::max(post.probability(s, a, next), eps_prob)) -
         std::log(std::max(pre.probability(s, a, next), eps_prob));
}

LogRatioTable::LogRatioTable(const TabularMdp& pre, const TabularMdp& post, double eps_prob)
    : n_states_(pre.n_states()), n_actions_(pre.n_actions()) {
  require_same_spaces(pre, post);
  table_.assign(n_states_ * n_actions_ * n_states_, 0.0);
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a : pre.feasible_actions(s)) {
      for (std::size_t next = 0; next < n_states_; ++next) {
        table_[(s * n_actions_ + a) * n_states_ + next] =
            log_likelihood_ratio(pre, post, s, a, next, eps_prob);
      }
    }
  }
}

DetectorState shiryaev_step(DetectorState state, double lr, double rho) {
  if (!(lr >= 0.0)) throw ArgumentError("likelihood ratio must be non-negative");
  state.update_shiryaev(std::log(lr), rho);
  return state;
}

DetectorState shiryaev_step_log(DetectorState state, double log_lr, double rho) {
  state.update_shiryaev(log_lr, rho);
  return state;
}

DetectorState sr_step(DetectorState state, double lr) { return shiryaev_step(std::move(state), lr, 0.0); }

DetectorState cusum_step(DetectorState state, double log_lr) {
  state.update_windowed(std::span<const double>(&log_lr, 1));
  return state;
}

DetectorState glr_step(DetectorState state, std::span<const double> candidate_log_lrs) {
  state.update_windowed(candidate_log_lrs);
  return state;
}

DetectorState glr_step(DetectorState state, const Transition& t, const TabularMdp& pre,
                       std::span<const TabularMdp> grid, double eps_prob) {
  if (grid.empty()) throw ArgumentError("glr grid is empty");
  std::vector<double> ratios;
  ratios.reserve(grid.size());
  for (const auto& candidate : grid) {
    ratios.push_back(log_likelihood_ratio(pre, candidate, t.state, t.action, t.next_state, eps_prob));
  }
  state.update_windowed(ratios);
  return state;
}

double threshold_level(DetectorKind kind, double threshold) {
  if (kind == DetectorKind::shiryaev || kind == DetectorKind::sr) {
    if (!(threshold >= 0.0)) throw ArgumentError("statistic threshold must be non-negative");
    return std::log(threshold);
  }
  return threshold;
}

std::optional<std::size_t> check_stop(DetectorState& state, double threshold) {
  return state.check_level(threshold_level(state.kind(), threshold));
}

double shiryaev_batch_log(std::span<const double> prior, std::span<const double> log_lrs) {
  const std::size_t n = log_lrs.size();
  if (prior.size() < n) throw ArgumentError("prior shorter than the observation sequence");
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (prior[k] < 0.0) throw ArgumentError("prior has a negative entry");
    mass += prior[k];
  }
  if (mass > 1.0 + 1e-12) throw ArgumentError("prior mass exceeds one");

  // terms[k] = log prior(k+1) + sum_{i=k}^{n-1} log_lrs[i]
  std::vector<double> terms;
  terms.reserve(n);
  double suffix = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    suffix += log_lrs[k];
    if (prior[k] > 0.0) terms.push_back(std::log(prior[k]) + suffix);
  }
  if (terms.empty()) return kNegInf;
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

double shiryaev_batch(std::span<const double> prior, std::span<const double> log_lrs) {
  return std::exp(shiryaev_batch_log(prior, log_lrs));
}

std::vector<double> geometric_prior(double rho, std::size_t n) {
  check_rho(rho);
  std::vector<double> out(n);
  double survive = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = rho * survive;
    survive *= 1.0 - rho;
  }
  return out;
}

double posterior_from_shiryaev(double statistic, double rho) {
  if (statistic < 0.0) throw ArgumentError("shiryaev statistic must be non-negative");
  if (std::isinf(statistic)) return rho > 0.0 ? 1.0 : 0.0;
  const double odds = rho * statistic;
  return odds / (1.0 + odds);
}

double posterior_from_log_shiryaev(double log_statistic, double rho) {
  check_rho(rho);
  if (rho == 0.0 || log_statistic == kNegInf) return 0.0;
  const double log_odds = std::log(rho) + log_statistic;
  return log_odds > 0.0 ? 1.0 / (1.0 + std::exp(-log_odds))
                        : std::exp(log_odds) / (1.0 + std::exp(log_odds));
}

}  // namespace qcdmdp
