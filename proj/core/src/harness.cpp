#include "qcdmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qcdmdp/error.hpp"
#include "qcdmdp/solvers.hpp"

namespace qcdmdp {

Scenario::Scenario(std::shared_ptr<const ModelFamily> family, std::size_t initial_state)
    : family_(std::move(family)), initial_state_(initial_state) {
  if (!family_) throw ArgumentError("scenario needs a model family");
  const TabularMdp& m0 = family_->model(0);
  if (initial_state_ >= m0.n_states()) throw ArgumentError("initial state out of range");
  const std::size_t n = m0.n_states();
  const std::size_t m = m0.n_actions();
  for (int regime = 0; regime < 2; ++regime) {
    const TabularMdp& model = family_->model(static_cast<std::size_t>(regime));
    auto& cdf = cdf_[regime];
    cdf.assign(n * m * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a : model.feasible_actions(s)) {
        const auto row = cumulative(model.transition(s, a));
        std::copy(row.begin(), row.end(), cdf.begin() + static_cast<std::ptrdiff_t>((s * m + a) * n));
      }
    }
  }
}

std::size_t Scenario::sample_next(bool changed, std::size_t s, std::size_t a, double u) const {
  const std::size_t n = family_->model(0).n_states();
  const std::size_t m = family_->model(0).n_actions();
  const auto& cdf = cdf_[changed ? 1 : 0];
  return sample_index(std::span<const double>(cdf.data() + (s * m + a) * n, n), u);
}

void Scenario::set_momdp(std::shared_ptr<const RegimePomdp> pomdp,
                         std::shared_ptr<const BeliefGridPolicy> policy) {
  if (!pomdp || !policy) throw ArgumentError("momdp baseline needs both model and policy");
  if (policy->n_states != family_->model(0).n_states()) {
    throw ArgumentError("belief policy does not match the scenario state space");
  }
  pomdp_ = std::move(pomdp);
  momdp_policy_ = std::move(policy);
}

const RegimePomdp& Scenario::pomdp() const {
  if (!pomdp_) throw StateError("scenario has no momdp baseline attached");
  return *pomdp_;
}

const BeliefGridPolicy& Scenario::momdp_policy() const {
  if (!momdp_policy_) throw StateError("scenario has no momdp baseline attached");
  return *momdp_policy_;
}

Scenario make_inventory_scenario(const inventory::Params& params, double beta,
                                 std::size_t initial_state, double vi_tol, double eps_prob) {
  auto pre = inventory::build_inventory_mdp(params, inventory::Demand::poisson(params.lambda));
  auto post = inventory::build_inventory_mdp(params, inventory::Demand::uniform(params.u_max));
  auto pi0 = value_iteration(pre, beta, vi_tol).policy;
  auto pi1 = value_iteration(post, beta, vi_tol).policy;
  return Scenario(ModelFamily::pair(std::move(pre), std::move(post), std::move(pi0), std::move(pi1),
                                    eps_prob),
                  initial_state);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::oracle: return "oracle";
    case PolicyKind::loc: return "loc";
    case PolicyKind::kl: return "kl";
    case PolicyKind::tt: return "tt";
    case PolicyKind::random: return "random";
    case PolicyKind::momdp: return "momdp";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "momdp") return PolicyKind::momdp;
  switch (controller_kind_from_string(name)) {
    case ControllerKind::oracle: return PolicyKind::oracle;
    case ControllerKind::loc: return PolicyKind::loc;
    case ControllerKind::kl: return PolicyKind::kl;
    case ControllerKind::tt: return PolicyKind::tt;
    case ControllerKind::random: return PolicyKind::random;
  }
  throw ArgumentError("unknown policy kind '" + name + "'");
}

namespace {

ControllerKind controller_kind(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::oracle: return ControllerKind::oracle;
    case PolicyKind::loc: return ControllerKind::loc;
    case PolicyKind::kl: return ControllerKind::kl;
    case PolicyKind::tt: return ControllerKind::tt;
    case PolicyKind::random: return ControllerKind::random;
    case PolicyKind::momdp: break;
  }
  throw ArgumentError("momdp is not a switching controller");
}

// Runs fn(run_id) for every id on `workers` threads; ids are claimed in order.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EvaluationReport summarize(const std::string& policy, const std::vector<RunRecord>& runs,
                           const PolicySpec& spec, std::uint64_t seed) {
  EvaluationReport r;
  r.policy = policy;
  r.n_runs = runs.size();
  r.threshold_a = spec.threshold_a;
  r.threshold_b = spec.kind == PolicyKind::loc ? spec.threshold_a
                  : spec.kind == PolicyKind::kl ? 0.0
                                                : spec.threshold_b;
  r.seed = seed;
  std::vector<double> costs;
  costs.reserve(runs.size());
  double delay_sum = 0.0;
  std::size_t delay_count = 0;
  std::size_t premature = 0;
  for (const auto& run : runs) {
    costs.push_back(run.discounted_cost);
    if (run.detection_delay) {
      delay_sum += static_cast<double>(*run.detection_delay);
      ++delay_count;
    }
    if (run.premature_switch) ++premature;
  }
  std::tie(r.mean_cost, r.stderr_cost) = mean_and_stderr(costs);
  r.mean_delay = delay_count ? delay_sum / static_cast<double>(delay_count)
                             : std::numeric_limits<double>::quiet_NaN();
  r.premature_rate = runs.empty() ? 0.0 : static_cast<double>(premature) / static_cast<double>(runs.size());
  return r;
}

void check_cells(const std::vector<ThresholdCell>& cells) {
  if (cells.empty()) throw ArgumentError("threshold grid is empty");
  for (const auto& c : cells) {
    if (c.b > c.a) throw ArgumentError("threshold grid cell violates B <= A");
  }
}

bool cell_before(const ThresholdCell& x, const ThresholdCell& y) {
  return x.a < y.a || (x.a == y.a && x.b < y.b);
}

}  // namespace

RunRecord simulate_run(const Scenario& scenario, const PolicySpec& spec,
                       const inventory::ChangeSpec& change, const EpisodeOptions& options,
                       std::uint64_t master_seed, std::size_t run_id) {
  Engine change_rng = make_engine(master_seed, run_id, Stream::change_point);
  Engine dynamics = make_engine(master_seed, run_id, Stream::dynamics);
  const std::size_t gamma = inventory::sample_change_point(change, change_rng);

  RunRecord rec;
  if (spec.kind == PolicyKind::momdp) {
    MomdpController ctrl(scenario.pomdp(), scenario.momdp_policy(), scenario.family().eps_prob());
    rec = run_episode(scenario, ctrl, gamma, options, dynamics);
  } else {
    ControllerConfig config;
    config.kind = controller_kind(spec.kind);
    config.detector = spec.detector;
    config.threshold_a = spec.threshold_a;
    config.threshold_b = spec.threshold_b;
    config.oracle_gamma = gamma;
    SwitchController ctrl(scenario.family_ptr(), config,
                          make_engine(master_seed, run_id, Stream::policy));
    rec = run_episode(scenario, ctrl, gamma, options, dynamics);
  }
  rec.run_id = run_id;
  rec.policy = spec.label();
  return rec;
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

Evaluation monte_carlo(const Scenario& scenario, const PolicySpec& spec,
                       const MonteCarloOptions& options) {
  if (options.n_runs < 1) throw ArgumentError("monte_carlo needs at least one run");
  options.change.validate();
  if (spec.kind != PolicyKind::momdp && spec.kind != PolicyKind::oracle &&
      spec.kind != PolicyKind::random) {
    spec.detector.validate();
  }

  std::vector<RunRecord> runs(options.n_runs);
  parallel_for(options.n_runs, options.workers, [&](std::size_t id) {
    runs[id] = simulate_run(scenario, spec, options.change, options.episode,
                            options.master_seed, id);
  });

  Evaluation out;
  out.report = summarize(spec.label(), runs, spec, options.master_seed);
  if (options.keep_runs) out.runs = std::move(runs);
  return out;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (!(lo > 0.0 && hi >= lo)) throw ArgumentError("log_space needs 0 < lo <= hi");
  if (n == 1) return {hi};
  std::vector<double> out(n);
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<ThresholdCell> threshold_grid(PolicyKind kind, const GridSpec& grid) {
  std::vector<ThresholdCell> cells;
  for (double a : log_space(grid.a_min, grid.a_max, grid.a_points)) {
    switch (kind) {
      case PolicyKind::loc: cells.push_back({a, a}); break;
      case PolicyKind::kl: cells.push_back({a, 0.0}); break;
      case PolicyKind::tt:
        cells.push_back({a, 0.0});
        for (double b : log_space(a * std::pow(10.0, -grid.b_decades), a, grid.b_points)) {
          cells.push_back({a, b});
        }
        break;
      default: cells.push_back({a, 0.0}); break;
    }
  }
  return cells;
}

OptimizationResult optimize_thresholds(const Scenario& scenario, const PolicySpec& base,
                                       const std::vector<ThresholdCell>& cells,
                                       const MonteCarloOptions& options) {
  check_cells(cells);
  MonteCarloOptions opts = options;
  opts.keep_runs = false;
  OptimizationResult out;
  std::optional<std::size_t> best;
  for (const auto& cell : cells) {
    PolicySpec spec = base;
    spec.threshold_a = cell.a;
    spec.threshold_b = cell.b;
    auto report = monte_carlo(scenario, spec, opts).report;
    out.cells.push_back({cell, report});
    const std::size_t i = out.cells.size() - 1;
    if (!best) {
      best = i;
      continue;
    }
    const auto& incumbent = out.cells[*best];
    if (report.mean_cost < incumbent.report.mean_cost ||
        (report.mean_cost == incumbent.report.mean_cost && cell_before(cell, incumbent.cell))) {
      best = i;
    }
  }
  out.best = out.cells[*best].cell;
  out.report = out.cells[*best].report;
  return out;
}

GridEvaluation evaluate_grid_nonbayes(const Scenario& scenario, const PolicySpec& base,
                                      const std::vector<ThresholdCell>& cells,
                                      const MonteCarloOptions& options) {
  check_cells(cells);
  GridEvaluation out;
  out.policy = base.label();
  out.cells = cells;
  MonteCarloOptions e1 = options;
  e1.change = inventory::ChangeSpec::fixed(1);
  e1.keep_runs = false;
  MonteCarloOptions einf = e1;
  einf.change = inventory::ChangeSpec::never();
  for (const auto& cell : cells) {
    PolicySpec spec = base;
    spec.threshold_a = cell.a;
    spec.threshold_b = cell.b;
    out.e1.push_back(monte_carlo(scenario, spec, e1).report);
    out.einf.push_back(monte_carlo(scenario, spec, einf).report);
  }
  return out;
}

CalibrationResult calibrate_nonbayes(const GridEvaluation& grid, double alpha) {
  if (grid.cells.empty()) throw ArgumentError("calibration grid is empty");
  std::optional<std::size_t> chosen;
  std::size_t least_violating = 0;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (grid.einf[i].mean_cost < grid.einf[least_violating].mean_cost) least_violating = i;
    if (grid.einf[i].mean_cost > alpha) continue;
    if (!chosen || grid.e1[i].mean_cost < grid.e1[*chosen].mean_cost ||
        (grid.e1[i].mean_cost == grid.e1[*chosen].mean_cost &&
         cell_before(grid.cells[i], grid.cells[*chosen]))) {
      chosen = i;
    }
  }
  CalibrationResult out;
  out.alpha = alpha;
  out.feasible = chosen.has_value();
  const std::size_t i = chosen.value_or(least_violating);
  out.cell = grid.cells[i];
  out.e1 = grid.e1[i];
  out.einf = grid.einf[i];
  return out;
}

std::vector<FrontierRow> frontier_sweep(const std::vector<GridEvaluation>& grids,
                                        const std::vector<double>& alphas) {
  if (alphas.empty()) throw ArgumentError("frontier sweep needs at least one alpha");
  std::vector<FrontierRow> rows;
  for (double alpha : alphas) {
    for (const auto& grid : grids) {
      const auto c = calibrate_nonbayes(grid, alpha);
      rows.push_back(FrontierRow{alpha, grid.policy, c.feasible, c.cell, c.e1.mean_cost,
                                 c.e1.stderr_cost, c.einf.mean_cost, c.einf.stderr_cost});
    }
  }
  return rows;
}

std::vector<DelayRow> delay_profile(const Scenario& scenario, const DetectorConfig& detector,
                                    const StationaryPolicy& policy,
                                    const std::vector<double>& threshold_levels,
                                    const MonteCarloOptions& options) {
  detector.validate();
  if (detector.kind == DetectorKind::glr) {
    throw ArgumentError("delay_profile supports shiryaev, sr and cusum detectors");
  }
  validate_policy(scenario.regime(false), policy);
  const auto& ratios = scenario.family().log_ratios(0, 1);
  const std::size_t horizon = options.episode.horizon;
  const std::size_t levels = threshold_levels.size();
  const double rho = detector.kind == DetectorKind::sr ? 0.0 : detector.rho;

  // first_passage[run * levels + j]: detector step count at the first crossing, 0 if none.
  std::vector<std::size_t> first_passage(options.n_runs * levels, 0);
  std::vector<std::size_t> gammas(options.n_runs, kNoChange);
  parallel_for(options.n_runs, options.workers, [&](std::size_t id) {
    Engine change_rng = make_engine(options.master_seed, id, Stream::change_point);
    Engine dynamics = make_engine(options.master_seed, id, Stream::dynamics);
    const std::size_t gamma = inventory::sample_change_point(options.change, change_rng);
    gammas[id] = gamma;
    DetectorState state(detector.kind, detector.window, 1);
    std::size_t* passage = first_passage.data() + id * levels;
    std::size_t open = levels;
    std::size_t s = scenario.initial_state();
    for (std::size_t k = 0; k < horizon && open > 0; ++k) {
      const bool changed = k >= gamma;
      const std::size_t a = policy(s);
      const std::size_t next = scenario.sample_next(changed, s, a, uniform01(dynamics));
      const double log_lr = ratios(s, a, next);
      if (detector.kind == DetectorKind::cusum) state.update_windowed(std::span<const double>(&log_lr, 1));
      else state.update_shiryaev(log_lr, rho);
      for (std::size_t j = 0; j < levels; ++j) {
        if (passage[j] == 0 && state.level() > threshold_levels[j]) {
          passage[j] = state.steps();
          --open;
        }
      }
      s = next;
    }
  });

  std::vector<DelayRow> rows;
  for (std::size_t j = 0; j < levels; ++j) {
    double delay_sum = 0.0;
    std::size_t delays = 0;
    std::size_t premature = 0;
    for (std::size_t id = 0; id < options.n_runs; ++id) {
      const std::size_t tau = first_passage[id * levels + j];
      const std::size_t gamma = gammas[id];
      if (tau != 0 && tau < gamma) {
        ++premature;
        continue;
      }
      if (gamma >= horizon) continue;
      const std::size_t stop = tau == 0 ? horizon : tau;
      delay_sum += static_cast<double>(stop - gamma);
      ++delays;
    }
    DelayRow row;
    row.threshold_level = threshold_levels[j];
    row.mean_delay = delays ? delay_sum / static_cast<double>(delays)
                            : std::numeric_limits<double>::quiet_NaN();
    row.false_switch_rate = static_cast<double>(premature) / static_cast<double>(options.n_runs);
    row.n_runs = options.n_runs;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcdmdp
