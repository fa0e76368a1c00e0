#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcdmdp/detectors.hpp"
#include "qcdmdp/error.hpp"
#include "qcdmdp/inventory.hpp"
#include "qcdmdp/mdp.hpp"
#include "qcdmdp/momdp.hpp"
#include "qcdmdp/random.hpp"
#include "qcdmdp/switching.hpp"

namespace qcdmdp {

/// Everything an episode needs: the two regimes with their optimal policies,
/// sampling tables, and optionally a solved belief-grid policy.
///
/// Step k (cost C(s_k, a_k) and the draw of s_{k+1}) runs under M0 for k < Gamma
/// and under M1 for k >= Gamma.
class Scenario {
 public:
  Scenario(std::shared_ptr<const ModelFamily> family, std::size_t initial_state = 0);

  const ModelFamily& family() const { return *family_; }
  const std::shared_ptr<const ModelFamily>& family_ptr() const { return family_; }
  const TabularMdp& regime(bool changed) const { return family_->model(changed ? 1 : 0); }
  std::size_t initial_state() const noexcept { return initial_state_; }

  /// Next state for (s, a) under the given regime from one uniform draw.
  std::size_t sample_next(bool changed, std::size_t s, std::size_t a, double u) const;

  /// Attaches the belief-grid baseline (built with build_pomdp / belief_grid_solve).
  void set_momdp(std::shared_ptr<const RegimePomdp> pomdp,
                 std::shared_ptr<const BeliefGridPolicy> policy);
  bool has_momdp() const noexcept { return momdp_policy_ != nullptr; }
  const RegimePomdp& pomdp() const;
  const BeliefGridPolicy& momdp_policy() const;

 private:
  std::shared_ptr<const ModelFamily> family_;
  std::size_t initial_state_;
  std::vector<double> cdf_[2];
  std::shared_ptr<const RegimePomdp> pomdp_;
  std::shared_ptr<const BeliefGridPolicy> momdp_policy_;
};

/// Builds the inventory scenario: Poisson(lambda) before, Uniform{0..u_max}
/// after, optimal policies by value iteration at discount `beta`.
Scenario make_inventory_scenario(const inventory::Params& params, double beta,
                                 std::size_t initial_state = 0, double vi_tol = 1e-8,
                                 double eps_prob = kDefaultEpsProb);

enum class PolicyKind { oracle, loc, kl, tt, random, momdp };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

/// How to build a controller for one episode.
struct PolicySpec {
  PolicyKind kind = PolicyKind::tt;
  DetectorConfig detector;
  double threshold_a = 0.0;
  double threshold_b = 0.0;

  std::string label() const { return to_string(kind); }
};

struct EpisodeOptions {
  std::size_t horizon = 1000;
  double beta = 0.99;
  bool record_trace = false;
};

struct RunRecord {
  std::size_t run_id = 0;
  std::string policy;
  std::size_t gamma = kNoChange;
  std::optional<std::size_t> tau_switch;
  std::size_t horizon = 0;
  double discounted_cost = 0.0;
  std::optional<std::size_t> detection_delay;
  bool premature_switch = false;
  // Detector statistic after each step's update (empty unless requested).
  std::vector<double> statistic_trace;
};

/// Simulates one episode with change point `gamma` and the given controller.
/// Requires horizon >= 1. Deterministic in `dynamics`.
template <class Controller>
RunRecord run_episode(const Scenario& scenario, Controller& controller, std::size_t gamma,
                      const EpisodeOptions& options, Engine& dynamics);

/// Builds the controller for `spec` and runs episode `run_id` of `master_seed`,
/// drawing gamma from `change`.
RunRecord simulate_run(const Scenario& scenario, const PolicySpec& spec,
                       const inventory::ChangeSpec& change, const EpisodeOptions& options,
                       std::uint64_t master_seed, std::size_t run_id);

struct MonteCarloOptions {
  inventory::ChangeSpec change = inventory::ChangeSpec::geometric(0.01);
  EpisodeOptions episode;
  std::size_t n_runs = 1000;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  bool keep_runs = false;
};

struct EvaluationReport {
  std::string policy;
  std::size_t n_runs = 0;
  double mean_cost = 0.0;
  double stderr_cost = 0.0;
  // Mean over runs with a defined delay; NaN when there are none.
  double mean_delay = 0.0;
  double premature_rate = 0.0;
  double threshold_a = 0.0;
  double threshold_b = 0.0;
  std::uint64_t seed = 0;

  double ci95_low() const { return mean_cost - 1.96 * stderr_cost; }
  double ci95_high() const { return mean_cost + 1.96 * stderr_cost; }
};

struct Evaluation {
  EvaluationReport report;
  std::vector<RunRecord> runs;  // filled when keep_runs
};

/// Runs n_runs episodes (run ids 0..n_runs-1) and aggregates them in run-id
/// order, so the result does not depend on the number of workers.
Evaluation monte_carlo(const Scenario& scenario, const PolicySpec& spec,
                       const MonteCarloOptions& options);

struct ThresholdCell {
  double a = 0.0;
  double b = 0.0;
};

struct GridSpec {
  double a_min = 1.0;
  double a_max = 1e6;
  std::size_t a_points = 30;
  std::size_t b_points = 15;
  // B runs log-spaced over [A * 10^-b_decades, A] besides B = 0.
  double b_decades = 6.0;
};

std::vector<double> log_space(double lo, double hi, std::size_t n);

/// Cells for a policy kind: loc uses B = A, kl uses B = 0, tt uses
/// {0} plus b_points log-spaced values up to and including A.
std::vector<ThresholdCell> threshold_grid(PolicyKind kind, const GridSpec& grid);

struct CellResult {
  ThresholdCell cell;
  EvaluationReport report;
};

struct OptimizationResult {
  ThresholdCell best;
  EvaluationReport report;
  std::vector<CellResult> cells;
};

/// Exhaustive search for the cell with the lowest mean cost; every cell sees
/// the same seeds. Ties go to the smaller A, then the smaller B. Throws
/// ArgumentError for an empty grid or a cell with B > A.
OptimizationResult optimize_thresholds(const Scenario& scenario, const PolicySpec& base,
                                       const std::vector<ThresholdCell>& cells,
                                       const MonteCarloOptions& options);

/// E_1 (change at time 1) and E_inf (no change) costs of every grid cell.
struct GridEvaluation {
  std::string policy;
  std::vector<ThresholdCell> cells;
  std::vector<EvaluationReport> e1;
  std::vector<EvaluationReport> einf;
};

GridEvaluation evaluate_grid_nonbayes(const Scenario& scenario, const PolicySpec& base,
                                      const std::vector<ThresholdCell>& cells,
                                      const MonteCarloOptions& options);

struct CalibrationResult {
  bool feasible = false;
  double alpha = 0.0;
  // The chosen cell; when infeasible, the cell with the lowest E_inf cost.
  ThresholdCell cell;
  EvaluationReport e1;
  EvaluationReport einf;
};

/// Among cells with E_inf cost <= alpha, the one with the lowest E_1 cost
/// (ties: smaller A, then smaller B).
CalibrationResult calibrate_nonbayes(const GridEvaluation& grid, double alpha);

struct FrontierRow {
  double alpha = 0.0;
  std::string policy;
  bool feasible = false;
  ThresholdCell cell;
  double e1_cost = 0.0;
  double e1_stderr = 0.0;
  double einf_cost = 0.0;
  double einf_stderr = 0.0;
};

std::vector<FrontierRow> frontier_sweep(const std::vector<GridEvaluation>& grids,
                                        const std::vector<double>& alphas);

struct DelayRow {
  double threshold_level = 0.0;  // log A for shiryaev/sr
  double mean_delay = 0.0;       // censored at the horizon when no stop occurs
  double false_switch_rate = 0.0;
  std::size_t n_runs = 0;
};

/// Detection delay and premature-stop rate of `detector` while `policy` is
/// played throughout, for each threshold level (compared against
/// DetectorState::level()). All levels share the same sample paths.
std::vector<DelayRow> delay_profile(const Scenario& scenario, const DetectorConfig& detector,
                                    const StationaryPolicy& policy,
                                    const std::vector<double>& threshold_levels,
                                    const MonteCarloOptions& options);

/// Sample mean and standard error (0 for a single sample).
std::pair<double, double> mean_and_stderr(const std::vector<double>& xs);

// ---------------------------------------------------------------------------

template <class Controller>
RunRecord run_episode(const Scenario& scenario, Controller& controller, std::size_t gamma,
                      const EpisodeOptions& options, Engine& dynamics) {
  if (options.horizon < 1) throw ArgumentError("episode horizon must be at least 1");
  RunRecord rec;
  rec.gamma = gamma;
  rec.horizon = options.horizon;

  std::size_t s = scenario.initial_state();
  std::optional<Transition> last;
  double discount = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < options.horizon; ++k) {
    const bool changed = k >= gamma;
    const std::size_t a = controller.step(s, last, k);
    const TabularMdp& m = scenario.regime(changed);
    if (!m.is_feasible(s, a)) throw ArgumentError("controller chose an infeasible action");
    total += discount * m.cost(s, a);
    discount *= options.beta;
    if constexpr (requires { controller.detector(); }) {
      if (options.record_trace) rec.statistic_trace.push_back(controller.detector().statistic());
    }
    const std::size_t next = scenario.sample_next(changed, s, a, uniform01(dynamics));
    last = Transition{s, a, next};
    s = next;
  }
  rec.discounted_cost = total;

  if constexpr (requires { controller.switch_time(); }) {
    rec.tau_switch = controller.switch_time();
  }
  if (rec.tau_switch) {
    rec.premature_switch = *rec.tau_switch < gamma;
    if (gamma != kNoChange) {
      rec.detection_delay = *rec.tau_switch > gamma ? *rec.tau_switch - gamma : 0;
    }
  }
  return rec;
}

}  // namespace qcdmdp
