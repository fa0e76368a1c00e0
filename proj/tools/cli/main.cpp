#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "../app/commands.hpp"
#include "../app/config.hpp"
#include "qcdmdp/error.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "INI experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed (overrides experiment.seed)");
  cmd->add_option("--workers", f.workers, "episode worker threads (overrides experiment.workers)");
  cmd->add_option("--out", f.out, "output directory (overrides experiment.out)");
  cmd->add_option("--set", f.overrides, "override a config key: section.key=value (repeatable)");
}

qcdmdp::app::ExperimentConfig resolve(const CommonFlags& f) {
  qcdmdp::app::Settings s;
  if (!f.config.empty()) s.load_ini(f.config);
  for (const auto& o : f.overrides) s.set_assignment(o);
  if (f.seed) s.set("experiment.seed", std::to_string(*f.seed));
  if (f.workers) s.set("experiment.workers", std::to_string(*f.workers));
  if (!f.out.empty()) s.set("experiment.out", f.out);
  return qcdmdp::app::build_config(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-detection driven control of an inventory MDP whose demand law shifts"};
  app.footer(qcdmdp::app::schema_help());
  app.require_subcommand(1);

  CommonFlags flags;
  auto* solve = app.add_subcommand("solve", "solve both regimes; write solution.json and model files");
  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation; write runs.csv and summary.csv");
  auto* sweep = app.add_subcommand("sweep", "constrained (E_1 vs E_inf) frontier; write frontier.csv");
  auto* calibrate = app.add_subcommand("calibrate", "pick thresholds per policy; write thresholds.csv");
  auto* info = app.add_subcommand("info", "print detector statistics along a trajectory");
  for (auto* cmd : {solve, evaluate, sweep, calibrate, info}) add_common(cmd, flags);

  bool assert_ordering = false;
  evaluate->add_flag("--assert-ordering", assert_ordering,
                     "fail unless oracle < tt < loc < random with disjoint 95% intervals");
  std::optional<double> alpha;
  calibrate->add_option("--alpha", alpha, "constraint level for the constrained problem (nonbayes.alpha_mode units)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = resolve(flags);
    if (solve->parsed()) qcdmdp::app::cmd_solve(cfg, std::cerr);
    if (evaluate->parsed()) qcdmdp::app::cmd_evaluate(cfg, assert_ordering, std::cerr);
    if (sweep->parsed()) qcdmdp::app::cmd_sweep(cfg, std::cerr);
    if (calibrate->parsed()) qcdmdp::app::cmd_calibrate(cfg, alpha, std::cerr);
    if (info->parsed()) qcdmdp::app::cmd_info(cfg, std::cout, std::cerr);
  } catch (const qcdmdp::app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
