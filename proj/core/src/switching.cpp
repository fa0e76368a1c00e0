#include "qcdmdp/switching.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qcdmdp/error.hpp"
#include "qcdmdp/information.hpp"

namespace qcdmdp {

StationaryPolicy kl_policy(const TabularMdp& pre, const TabularMdp& post, double eps_prob) {
  return worst_case_kl_policy(pre, std::span<const TabularMdp>(&post, 1), eps_prob);
}

StationaryPolicy worst_case_kl_policy(const TabularMdp& pre, std::span<const TabularMdp> grid,
                                      double eps_prob) {
  if (grid.empty()) throw ArgumentError("worst_case_kl_policy: empty candidate grid");
  for (const auto& m : grid) require_same_spaces(pre, m);

  StationaryPolicy policy;
  policy.action.resize(pre.n_states());
  for (std::size_t s = 0; s < pre.n_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = pre.n_actions();
    for (std::size_t a : pre.feasible_actions(s)) {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& m : grid) worst = std::min(worst, transition_kl(pre, m, s, a, eps_prob));
      if (worst > best || (worst == best && a < arg)) {
        best = worst;
        arg = a;
      }
    }
    policy.action[s] = arg;
  }
  return policy;
}

ModelFamily::ModelFamily(std::vector<TabularMdp> models,
                         std::vector<StationaryPolicy> optimal_policies,
                         std::vector<std::vector<double>> parameters, double eps_prob,
                         double min_separation)
    : models_(std::move(models)), optimal_(std::move(optimal_policies)), eps_prob_(eps_prob) {
  const std::size_t n = models_.size();
  if (n < 2) throw ArgumentError("a model family needs at least two models");
  if (optimal_.size() != n) throw ArgumentError("one optimal policy per model is required");
  if (!parameters.empty() && parameters.size() != n) {
    throw ArgumentError("parameters must be empty or one per model");
  }
  for (std::size_t i = 0; i < n; ++i) {
    require_same_spaces(models_[0], models_[i]);
    validate_policy(models_[i], optimal_[i]);
  }

  auto distance = [&](std::size_t i, std::size_t j) {
    if (parameters.empty()) return std::numeric_limits<double>::infinity();
    if (parameters[i].size() != parameters[j].size()) {
      throw ArgumentError("parameter vectors have different dimensions");
    }
    double d = 0.0;
    for (std::size_t k = 0; k < parameters[i].size(); ++k) {
      d += (parameters[i][k] - parameters[j][k]) * (parameters[i][k] - parameters[j][k]);
    }
    return std::sqrt(d);
  };

  candidates_.resize(n);
  probe_.resize(n);
  ratios_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TabularMdp> grid;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ratios_[i * n + j].emplace(models_[i], models_[j], eps_prob_);
      if (distance(i, j) >= min_separation) {
        candidates_[i].push_back(j);
        grid.push_back(models_[j]);
      }
    }
    probe_[i] = grid.empty() ? optimal_[i] : worst_case_kl_policy(models_[i], grid, eps_prob_);
  }
}

std::shared_ptr<const ModelFamily> ModelFamily::pair(TabularMdp pre, TabularMdp post,
                                                     StationaryPolicy pi0, StationaryPolicy pi1,
                                                     double eps_prob) {
  std::vector<TabularMdp> models;
  models.push_back(std::move(pre));
  models.push_back(std::move(post));
  std::vector<StationaryPolicy> policies{std::move(pi0), std::move(pi1)};
  return std::make_shared<const ModelFamily>(std::move(models), std::move(policies),
                                             std::vector<std::vector<double>>{}, eps_prob);
}

const LogRatioTable& ModelFamily::log_ratios(std::size_t pre, std::size_t post) const {
  const auto& entry = ratios_.at(pre * size() + post);
  if (!entry) throw ArgumentError("no log-ratio table for identical models");
  return *entry;
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::oracle: return "oracle";
    case ControllerKind::loc: return "loc";
    case ControllerKind::kl: return "kl";
    case ControllerKind::tt: return "tt";
    case ControllerKind::random: return "random";
  }
  return "unknown";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::pre: return "pre";
    case Phase::probe: return "probe";
    case Phase::post: return "post";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(std::string_view name) {
  if (name == "oracle") return ControllerKind::oracle;
  if (name == "loc") return ControllerKind::loc;
  if (name == "kl") return ControllerKind::kl;
  if (name == "tt") return ControllerKind::tt;
  if (name == "random") return ControllerKind::random;
  throw ArgumentError("unknown controller kind '" + std::string(name) + "'");
}

ControllerConfig normalized(ControllerConfig config) {
  if (config.kind == ControllerKind::loc) config.threshold_b = config.threshold_a;
  if (config.kind == ControllerKind::kl) config.threshold_b = 0.0;
  return config;
}

SwitchController::SwitchController(std::shared_ptr<const ModelFamily> family,
                                   ControllerConfig config, Engine policy_rng,
                                   std::size_t pre_index)
    : family_(std::move(family)),
      config_(normalized(config)),
      pre_(pre_index),
      level_a_(0.0),
      level_b_(0.0),
      rng_(policy_rng) {
  if (!family_) throw ArgumentError("controller needs a model family");
  if (pre_ >= family_->size()) throw ArgumentError("pre-change model index out of range");
  config_.detector.validate();

  const auto kind = config_.kind;
  if (kind == ControllerKind::oracle || kind == ControllerKind::random) return;

  candidates_ = family_->candidates(pre_);
  if (candidates_.empty()) throw ArgumentError("no candidate post-change model is separated enough");
  if (config_.detector.kind != DetectorKind::glr) candidates_.resize(1);
  for (std::size_t c : candidates_) ratios_.push_back(&family_->log_ratios(pre_, c));
  scratch_.resize(candidates_.size());

  detector_ = DetectorState(config_.detector.kind, config_.detector.window, candidates_.size());
  level_a_ = threshold_level(config_.detector.kind, config_.threshold_a);
  level_b_ = threshold_level(config_.detector.kind, config_.threshold_b);
}

std::size_t SwitchController::random_action(std::size_t s) {
  const auto actions = family_->model(pre_).feasible_actions(s);
  return actions[uniform_index(rng_, actions.size())];
}

std::size_t SwitchController::step(std::size_t s, std::optional<Transition> feedback,
                                   std::size_t now) {
  const auto& pi0 = family_->optimal_policy(pre_);
  switch (config_.kind) {
    case ControllerKind::random:
      return random_action(s);
    case ControllerKind::oracle:
      if (now >= config_.oracle_gamma) {
        if (!switch_time_) {
          switch_time_ = config_.oracle_gamma;
          detected_ = pre_ == 0 ? 1 : 0;
          phase_ = Phase::post;
        }
        return family_->optimal_policy(*detected_)(s);
      }
      return pi0(s);
    default:
      break;
  }

  if (config_.threshold_b > config_.threshold_a) {
    throw StateError("controller thresholds violate B <= A");
  }
  if (phase_ == Phase::post) return family_->optimal_policy(*detected_)(s);

  if (now >= 1) {
    if (!feedback) throw ArgumentError("controller step at now >= 1 requires the last transition");
    for (std::size_t c = 0; c < ratios_.size(); ++c) scratch_[c] = (*ratios_[c])(*feedback);
    if (config_.detector.kind == DetectorKind::shiryaev || config_.detector.kind == DetectorKind::sr) {
      const double rho = config_.detector.kind == DetectorKind::sr ? 0.0 : config_.detector.rho;
      detector_.update_shiryaev(scratch_[0], rho);
    } else {
      detector_.update_windowed(scratch_);
    }
    if (detector_.check_level(level_a_)) {
      phase_ = Phase::post;
      switch_time_ = now;
      detected_ = candidates_[detector_.best_candidate().value_or(0)];
      return family_->optimal_policy(*detected_)(s);
    }
  }
  phase_ = detector_.level() > level_b_ ? Phase::probe : Phase::pre;
  return phase_ == Phase::probe ? family_->probe_policy(pre_)(s) : pi0(s);
}

SwitchController glr_reset(const SwitchController& ctrl, std::optional<std::size_t> theta_hat) {
  if (!ctrl.switch_time() || !ctrl.detected_model()) {
    throw StateError("glr_reset requires a controller that has detected a change");
  }
  const std::size_t next_pre = theta_hat.value_or(*ctrl.detected_model());
  return SwitchController(ctrl.family(), ctrl.config(), Engine{}, next_pre);
}

}  // namespace qcdmdp
