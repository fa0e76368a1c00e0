#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qcdmdp/csv.hpp"
#include "qcdmdp/error.hpp"
#include "qcdmdp/model_io.hpp"
#include "qcdmdp/momdp.hpp"

namespace qcdmdp::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSolutionFile = "solution.json";

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RunError("cannot write " + path.string());
  return out;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = open_output(path);
  fn(out);
  if (!out) throw RunError("failed writing " + path.string());
}

SolutionSummary load_solution(const ExperimentConfig& cfg) {
  const fs::path path = cfg.out / kSolutionFile;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RunError("no solution file at " + path.string() +
                   "; run `qcdmdp solve` with the same config first");
  }
  std::stringstream text;
  text << in.rdbuf();
  auto sol = solution_from_json(text.str());
  const auto& p = sol.params;
  const auto& q = cfg.inventory;
  if (p.capacity != q.capacity || p.order_cost != q.order_cost || p.holding_cost != q.holding_cost ||
      p.penalty != q.penalty || p.lambda != q.lambda || p.u_max != q.u_max || sol.beta != cfg.beta) {
    throw RunError(path.string() + " was solved for a different instance; rerun `qcdmdp solve`");
  }
  return sol;
}

Scenario scenario_from(const ExperimentConfig& cfg, const SolutionSummary& sol) {
  auto pre = inventory::build_inventory_mdp(cfg.inventory, inventory::Demand::poisson(cfg.inventory.lambda));
  auto post = inventory::build_inventory_mdp(cfg.inventory, inventory::Demand::uniform(cfg.inventory.u_max));
  validate_policy(pre, sol.pi0);
  validate_policy(post, sol.pi1);
  return Scenario(ModelFamily::pair(std::move(pre), std::move(post), sol.pi0, sol.pi1,
                                    cfg.detector.eps_prob),
                  cfg.initial_state);
}

Scenario scenario_from(const ExperimentConfig& cfg) {
  return make_inventory_scenario(cfg.inventory, cfg.beta, cfg.initial_state, cfg.solver_tol,
                                 cfg.detector.eps_prob);
}

void attach_momdp(Scenario& sc, const ExperimentConfig& cfg) {
  auto pomdp = std::make_shared<RegimePomdp>(build_pomdp(sc.regime(false), sc.regime(true),
                                                         cfg.change.kind == inventory::ChangeSpec::Kind::geometric
                                                             ? cfg.change.rho
                                                             : cfg.detector.rho));
  BeliefGridOptions opt;
  opt.grid_size = cfg.momdp_grid;
  opt.beta = cfg.beta;
  opt.tol = cfg.momdp_tol;
  opt.eps_prob = cfg.detector.eps_prob;
  auto policy = std::make_shared<BeliefGridPolicy>(belief_grid_solve(*pomdp, opt));
  sc.set_momdp(std::move(pomdp), std::move(policy));
}

bool has_thresholds(PolicyKind k) {
  return k == PolicyKind::loc || k == PolicyKind::tt || k == PolicyKind::kl;
}

PolicySpec base_spec(PolicyKind kind, const DetectorConfig& det) {
  PolicySpec s;
  s.kind = kind;
  s.detector = det;
  return s;
}

std::vector<ThresholdCell> fixed_cell(const ExperimentConfig& cfg, PolicyKind kind) {
  const double a = cfg.thresholds.a;
  const double b = kind == PolicyKind::loc ? a : kind == PolicyKind::kl ? 0.0 : cfg.thresholds.b;
  return {{a, b}};
}

const EvaluationReport* find_report(const std::vector<EvaluationReport>& reports, PolicyKind kind) {
  for (const auto& r : reports) {
    if (r.policy == to_string(kind)) return &r;
  }
  return nullptr;
}

void check_ordering(const std::vector<EvaluationReport>& reports, std::ostream& log) {
  const auto* oracle = find_report(reports, PolicyKind::oracle);
  const auto* tt = find_report(reports, PolicyKind::tt);
  const auto* loc = find_report(reports, PolicyKind::loc);
  const auto* random = find_report(reports, PolicyKind::random);
  if (!oracle || !tt || !loc || !random) {
    throw RunError("--assert-ordering needs oracle, tt, loc and random in experiment.policies");
  }
  std::vector<std::string> failures;
  auto below = [&](const EvaluationReport& x, const EvaluationReport& y) {
    if (!(x.ci95_high() < y.ci95_low())) {
      failures.push_back(x.policy + " [" + csv::format(x.ci95_low()) + ", " + csv::format(x.ci95_high()) +
                         "] does not lie below " + y.policy + " [" + csv::format(y.ci95_low()) + ", " +
                         csv::format(y.ci95_high()) + "]");
    }
  };
  below(*oracle, *tt);
  below(*tt, *loc);
  below(*loc, *random);
  if (const auto* m = find_report(reports, PolicyKind::momdp)) {
    if (!(oracle->mean_cost < m->mean_cost && m->mean_cost < random->mean_cost)) {
      failures.push_back("momdp mean cost is not between oracle and random");
    }
  }
  if (!failures.empty()) {
    std::string msg = "cost ordering assertion failed:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw RunError(msg);
  }
  log << "ordering holds: oracle < tt < loc < random (95% intervals disjoint)\n";
}

}  // namespace

void cmd_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const auto sol = solve_inventory(cfg.inventory, cfg.beta, cfg.solver_tol);
  const auto pre = inventory::build_inventory_mdp(cfg.inventory, inventory::Demand::poisson(cfg.inventory.lambda));
  const auto post = inventory::build_inventory_mdp(cfg.inventory, inventory::Demand::uniform(cfg.inventory.u_max));
  write_file(cfg.out / kSolutionFile, [&](std::ostream& o) { o << solution_to_json(sol); });
  write_file(cfg.out / "model_pre.json", [&](std::ostream& o) { o << model_to_json(pre) << '\n'; });
  write_file(cfg.out / "model_post.json", [&](std::ostream& o) { o << model_to_json(post) << '\n'; });
  log << "I_pi0 = " << csv::format(sol.info_pi0) << "\nI_pi_kl = " << csv::format(sol.info_pi_kl)
      << "\nI_max = " << csv::format(sol.info_max) << "\nwrote " << (cfg.out / kSolutionFile).string() << '\n';
}

void cmd_evaluate(const ExperimentConfig& cfg, bool assert_ordering, std::ostream& log) {
  const auto sol = load_solution(cfg);
  Scenario sc = scenario_from(cfg, sol);
  if (std::find(cfg.policies.begin(), cfg.policies.end(), PolicyKind::momdp) != cfg.policies.end()) {
    attach_momdp(sc, cfg);
  }
  const auto mc = cfg.monte_carlo();
  std::vector<EvaluationReport> reports;
  std::vector<RunRecord> runs;
  for (PolicyKind kind : cfg.policies) {
    PolicySpec spec = base_spec(kind, cfg.detector);
    if (has_thresholds(kind)) {
      const auto cells = cfg.thresholds.optimize ? threshold_grid(kind, cfg.grid) : fixed_cell(cfg, kind);
      log << "optimizing " << to_string(kind) << " over " << cells.size() << " threshold cells\n";
      const auto opt = optimize_thresholds(sc, spec, cells, mc);
      spec.threshold_a = opt.best.a;
      spec.threshold_b = opt.best.b;
      if (cfg.thresholds.optimize) {
        write_file(cfg.out / ("grid_" + to_string(kind) + ".csv"), [&](std::ostream& o) { csv::write_grid(o, opt.cells); });
      }
    }
    auto opts = mc;
    opts.keep_runs = true;
    auto ev = monte_carlo(sc, spec, opts);
    log << to_string(kind) << ": mean cost " << csv::format(ev.report.mean_cost) << " +/- "
        << csv::format(ev.report.stderr_cost) << '\n';
    reports.push_back(ev.report);
    runs.insert(runs.end(), ev.runs.begin(), ev.runs.end());
  }
  write_file(cfg.out / "runs.csv", [&](std::ostream& o) { csv::write_runs(o, runs); });
  write_file(cfg.out / "summary.csv", [&](std::ostream& o) { csv::write_summary(o, reports); });
  if (assert_ordering) check_ordering(reports, log);
}

namespace {

struct NonBayesSetup {
  Scenario scenario;
  DetectorConfig detector;
  double never_switch_cost;  // E_inf cost of playing pi_0 throughout
};

NonBayesSetup nonbayes_setup(const ExperimentConfig& cfg) {
  Scenario sc = scenario_from(cfg);
  DetectorConfig det = cfg.detector;
  det.kind = cfg.nonbayes_detector;
  auto never = cfg.monte_carlo();
  never.change = inventory::ChangeSpec::never();
  const double base = monte_carlo(sc, base_spec(PolicyKind::oracle, det), never).report.mean_cost;
  return {std::move(sc), det, base};
}

std::vector<double> absolute_alphas(const ExperimentConfig& cfg, const std::vector<double>& xs, double base) {
  std::vector<double> out;
  for (double x : xs) out.push_back(cfg.alpha_relative ? (1.0 + x) * base : x);
  return out;
}

}  // namespace

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.alphas.empty()) throw ConfigError("config key 'nonbayes.alphas': sweep needs at least one alpha");
  if (cfg.nonbayes_policies.empty()) throw ConfigError("config key 'nonbayes.policies': nothing to sweep");
  auto setup = nonbayes_setup(cfg);
  const auto alphas = absolute_alphas(cfg, cfg.alphas, setup.never_switch_cost);
  log << "never-switch E_inf cost " << csv::format(setup.never_switch_cost) << '\n';
  std::vector<GridEvaluation> grids;
  for (PolicyKind kind : cfg.nonbayes_policies) {
    const auto cells = cfg.thresholds.optimize ? threshold_grid(kind, cfg.grid) : fixed_cell(cfg, kind);
    log << "evaluating " << to_string(kind) << " on " << cells.size() << " cells under E_1 and E_inf\n";
    grids.push_back(evaluate_grid_nonbayes(setup.scenario, base_spec(kind, setup.detector), cells, cfg.monte_carlo()));
  }
  const auto rows = frontier_sweep(grids, alphas);
  write_file(cfg.out / "frontier.csv", [&](std::ostream& o) { csv::write_frontier(o, rows); });
  write_file(cfg.out / "nonbayes_grid.csv", [&](std::ostream& o) {
    o << "policy,A,B,e1_cost,e1_stderr,einf_cost,einf_stderr\n";
    for (const auto& g : grids) {
      for (std::size_t i = 0; i < g.cells.size(); ++i) {
        o << g.policy << ',' << csv::format(g.cells[i].a) << ',' << csv::format(g.cells[i].b) << ','
          << csv::format(g.e1[i].mean_cost) << ',' << csv::format(g.e1[i].stderr_cost) << ','
          << csv::format(g.einf[i].mean_cost) << ',' << csv::format(g.einf[i].stderr_cost) << '\n';
      }
    }
  });
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += r.feasible ? 0 : 1;
  if (infeasible) log << infeasible << " (alpha, policy) pairs have no feasible cell (feasible = 0 in frontier.csv)\n";
}

void cmd_calibrate(const ExperimentConfig& cfg, std::optional<double> alpha, std::ostream& log) {
  const auto policies = alpha ? cfg.nonbayes_policies : std::vector<PolicyKind>{};
  std::vector<std::string> lines;
  if (alpha) {
    if (policies.empty()) throw ConfigError("config key 'nonbayes.policies': nothing to calibrate");
    auto setup = nonbayes_setup(cfg);
    const double level = absolute_alphas(cfg, {*alpha}, setup.never_switch_cost).front();
    for (PolicyKind kind : policies) {
      const auto cells = cfg.thresholds.optimize ? threshold_grid(kind, cfg.grid) : fixed_cell(cfg, kind);
      const auto grid = evaluate_grid_nonbayes(setup.scenario, base_spec(kind, setup.detector), cells, cfg.monte_carlo());
      const auto c = calibrate_nonbayes(grid, level);
      if (!c.feasible) log << to_string(kind) << ": no cell meets alpha = " << csv::format(level) << '\n';
      lines.push_back(to_string(kind) + "," + csv::format(level) + "," + (c.feasible ? "1" : "0") + "," +
                      csv::format(c.cell.a) + "," + csv::format(c.cell.b) + "," + csv::format(c.e1.mean_cost) +
                      "," + csv::format(c.einf.mean_cost));
    }
    write_file(cfg.out / "thresholds.csv", [&](std::ostream& o) {
      o << "policy,alpha,feasible,A,B,e1_cost,einf_cost\n";
      for (const auto& l : lines) o << l << '\n';
    });
    return;
  }
  Scenario sc = scenario_from(cfg);
  const auto mc = cfg.monte_carlo();
  for (PolicyKind kind : cfg.policies) {
    if (!has_thresholds(kind)) continue;
    const auto cells = cfg.thresholds.optimize ? threshold_grid(kind, cfg.grid) : fixed_cell(cfg, kind);
    const auto opt = optimize_thresholds(sc, base_spec(kind, cfg.detector), cells, mc);
    write_file(cfg.out / ("grid_" + to_string(kind) + ".csv"), [&](std::ostream& o) { csv::write_grid(o, opt.cells); });
    log << to_string(kind) << ": A = " << csv::format(opt.best.a) << ", B = " << csv::format(opt.best.b)
        << ", mean cost " << csv::format(opt.report.mean_cost) << '\n';
    lines.push_back(to_string(kind) + "," + csv::format(opt.best.a) + "," + csv::format(opt.best.b) + "," +
                    csv::format(opt.report.mean_cost) + "," + csv::format(opt.report.stderr_cost));
  }
  write_file(cfg.out / "thresholds.csv", [&](std::ostream& o) {
    o << "policy,A,B,mean_cost,stderr\n";
    for (const auto& l : lines) o << l << '\n';
  });
}

namespace {

std::vector<Transition> parse_trajectory(const std::string& text, const TabularMdp& m) {
  std::vector<Transition> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    Transition t;
    char c1 = 0, c2 = 0;
    std::stringstream one(item);
    if (!(one >> t.state >> c1 >> t.action >> c2 >> t.next_state) || c1 != ':' || c2 != ':') {
      throw ConfigError("config key 'info.trajectory': cannot parse '" + item + "' as s:a:s2");
    }
    if (t.state >= m.n_states() || t.next_state >= m.n_states() || !m.is_feasible(t.state, t.action)) {
      throw ConfigError("config key 'info.trajectory': transition '" + item + "' is not feasible");
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

void cmd_info(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log) {
  Scenario sc = scenario_from(cfg);
  const auto& fam = sc.family();
  std::vector<Transition> path;
  if (!cfg.info_trajectory.empty()) {
    path = parse_trajectory(cfg.info_trajectory, sc.regime(false));
  } else {
    const auto& pi = cfg.info_policy == "kl" ? fam.probe_policy(0) : fam.optimal_policy(0);
    Engine dyn = make_engine(cfg.seed, 0, Stream::dynamics);
    std::size_t s = sc.initial_state();
    for (std::size_t k = 0; k < cfg.info_steps; ++k) {
      const std::size_t a = pi(s);
      const std::size_t next = sc.sample_next(k >= cfg.info_gamma, s, a, uniform01(dyn));
      path.push_back({s, a, next});
      s = next;
    }
    log << "simulated " << cfg.info_steps << " steps of " << cfg.info_policy << " with change at step "
        << cfg.info_gamma << '\n';
  }
  const auto& ratios = fam.log_ratios(0, 1);
  const double rho = cfg.detector.rho;
  DetectorState shiryaev(DetectorKind::shiryaev), sr(DetectorKind::sr), cusum(DetectorKind::cusum, cfg.detector.window);
  out << "n,s,a,s_next,log_lr,log_shiryaev,log_sr,cusum,posterior\n";
  for (std::size_t n = 0; n < path.size(); ++n) {
    const double x = ratios(path[n]);
    shiryaev.update_shiryaev(x, rho);
    sr.update_shiryaev(x, 0.0);
    cusum.update_windowed(std::span<const double>(&x, 1));
    out << n + 1 << ',' << path[n].state << ',' << path[n].action << ',' << path[n].next_state << ','
        << csv::format(x) << ',' << csv::format(shiryaev.level()) << ',' << csv::format(sr.level()) << ','
        << csv::format(cusum.level()) << ',' << csv::format(posterior_from_log_shiryaev(shiryaev.level(), rho))
        << '\n';
  }
}

}  // namespace qcdmdp::app
