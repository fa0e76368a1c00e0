#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>

#include "config.hpp"

namespace qcdmdp::app {

/// A command could not complete (missing inputs, failed assertion). Exit code 2.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes solution.json and the two model files into cfg.out.
void cmd_solve(const ExperimentConfig& cfg, std::ostream& log);

/// Writes runs.csv and summary.csv (plus grid_<policy>.csv for optimized
/// thresholds). Needs solution.json from cmd_solve.
void cmd_evaluate(const ExperimentConfig& cfg, bool assert_ordering, std::ostream& log);

/// Constrained frontier: frontier.csv and nonbayes_grid.csv.
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);

/// Threshold selection per policy into thresholds.csv: Bayes-optimal over the
/// grid, or the constrained choice at `alpha` when given.
void cmd_calibrate(const ExperimentConfig& cfg, std::optional<double> alpha, std::ostream& log);

/// Prints detector statistics along a scripted or simulated trajectory.
void cmd_info(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log);

}  // namespace qcdmdp::app
