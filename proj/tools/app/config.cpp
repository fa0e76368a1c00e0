#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qcdmdp/error.hpp"

namespace qcdmdp::app {

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys{
      {"inventory.capacity", "20", "units", "storage capacity N; states 0..N"},
      {"inventory.order_cost", "1", "cost/unit", "ordering cost c"},
      {"inventory.holding_cost", "5", "cost/unit", "holding cost h on stock left after demand"},
      {"inventory.penalty", "100", "cost/unit", "lost-sales penalty p"},
      {"inventory.lambda", "2", "units/step", "Poisson demand rate before the change"},
      {"inventory.u_max", "", "units", "post-change demand is Uniform{0..u_max}; empty means N"},
      {"inventory.initial_state", "0", "units", "stock level at time 0"},
      {"change.kind", "geometric", "-", "change point law: geometric | fixed | never"},
      {"change.rho", "0.01", "1/step", "geometric change probability per step"},
      {"change.gamma", "1", "step", "change point for kind = fixed"},
      {"detector.kind", "shiryaev", "-", "shiryaev | sr | cusum | glr"},
      {"detector.rho", "", "1/step", "Shiryaev prior parameter; empty means change.rho"},
      {"detector.window", "200", "steps", "CUSUM/GLR look-back m"},
      {"detector.eps_prob", "1e-12", "-", "probability floor inside log ratios"},
      {"experiment.policies", "oracle,tt,loc,momdp,random", "-",
       "policies for evaluate: oracle, loc, kl, tt, random, momdp"},
      {"experiment.beta", "0.99", "-", "discount factor"},
      {"experiment.horizon", "1000", "steps", "episode length H"},
      {"experiment.runs", "1000", "episodes", "Monte Carlo runs per evaluation"},
      {"experiment.seed", "1", "-", "master seed; every random stream derives from it"},
      {"experiment.workers", "1", "threads", "parallel episode workers (results do not depend on it)"},
      {"experiment.out", "out", "path", "output directory"},
      {"solver.tol", "1e-8", "cost", "value iteration Bellman residual"},
      {"grid.a_min", "1", "statistic", "smallest threshold A"},
      {"grid.a_max", "1e6", "statistic", "largest threshold A"},
      {"grid.a_points", "30", "-", "log-spaced A values"},
      {"grid.b_points", "15", "-", "log-spaced B values per A besides B = 0"},
      {"grid.b_decades", "6", "decades", "B ranges over [A 10^-b_decades, A]"},
      {"thresholds.mode", "optimize", "-", "optimize over the grid, or fixed"},
      {"thresholds.a", "100", "statistic", "A when mode = fixed"},
      {"thresholds.b", "1", "statistic", "B when mode = fixed (tt only)"},
      {"momdp.grid_size", "201", "points", "belief grid resolution"},
      {"momdp.tol", "1e-6", "cost", "belief-grid value iteration tolerance"},
      {"nonbayes.policies", "loc,tt", "-", "policies on the constrained frontier"},
      {"nonbayes.detector", "sr", "-", "detector for the constrained problem"},
      {"nonbayes.alphas", "", "cost or fraction", "comma-separated constraint levels"},
      {"nonbayes.alpha_mode", "relative", "-",
       "relative: alpha = (1 + x) times the never-switch E_inf cost; absolute: alpha = x"},
      {"info.trajectory", "", "-", "scripted transitions 's:a:s2;...'; empty simulates"},
      {"info.steps", "30", "steps", "simulated steps when no trajectory is given"},
      {"info.gamma", "10", "step", "change point of the simulated trajectory"},
      {"info.policy", "pi0", "-", "policy of the simulated trajectory: pi0 | kl"},
  };
  return keys;
}

std::string schema_help() {
  std::ostringstream out;
  out << "Configuration keys (INI sections; override with --set section.key=value):\n";
  for (const auto& k : schema()) {
    out << "  " << k.key;
    for (std::size_t i = k.key.size(); i < 24; ++i) out << ' ';
    out << '[' << k.unit << "] " << k.help << " (default: "
        << (k.default_value.empty() ? "see text" : k.default_value) << ")\n";
  }
  return out.str();
}

namespace {

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

}  // namespace

Settings::Settings() {
  for (const auto& k : schema()) values_[k.key] = k.default_value;
}

void Settings::load_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path.string() + "': " + e.message() +
                      (e.line() ? " (line " + std::to_string(e.line()) + ")" : ""));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) bad(section, "top-level keys must live in a [section]");
    for (const auto& [name, value] : body) set(section + "." + name, value.data());
  }
}

void Settings::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Settings::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) bad(key, "unknown key (see --help for the schema)");
  values_[key] = trim(value);
}

const std::string& Settings::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) bad(key, "unknown key");
  return it->second;
}

double Settings::number(const std::string& key) const {
  const auto& v = raw(key);
  double x = 0.0;
  std::size_t used = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    bad(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) bad(key, "expected a number, got '" + v + "'");
  return x;
}

std::size_t Settings::count(const std::string& key) const {
  const auto& v = raw(key);
  std::size_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    bad(key, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::uint64_t Settings::seed(const std::string& key) const {
  const auto& v = raw(key);
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad(key, "expected an unsigned integer, got '" + v + "'");
  return x;
}

std::vector<std::string> Settings::list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream in(raw(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Settings::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : list(key)) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) bad(key, "expected numbers, got '" + item + "'");
    out.push_back(x);
  }
  return out;
}

MonteCarloOptions ExperimentConfig::monte_carlo() const {
  MonteCarloOptions o;
  o.change = change;
  o.episode.horizon = horizon;
  o.episode.beta = beta;
  o.n_runs = runs;
  o.master_seed = seed;
  o.workers = workers;
  return o;
}

namespace {

std::vector<PolicyKind> policy_list(const Settings& s, const std::string& key) {
  std::vector<PolicyKind> out;
  for (const auto& name : s.list(key)) {
    try {
      const auto k = policy_kind_from_string(name);
      if (std::find(out.begin(), out.end(), k) != out.end()) bad(key, "policy '" + name + "' listed twice");
      out.push_back(k);
    } catch (const qcdmdp::ArgumentError&) {
      bad(key, "unknown policy '" + name + "'");
    }
  }
  return out;
}

DetectorKind detector_kind(const Settings& s, const std::string& key) {
  try {
    return detector_kind_from_string(s.raw(key));
  } catch (const qcdmdp::ArgumentError&) {
    bad(key, "unknown detector '" + s.raw(key) + "'");
  }
}

}  // namespace

ExperimentConfig build_config(const Settings& s) {
  ExperimentConfig c;
  auto& inv = c.inventory;
  inv.capacity = s.count("inventory.capacity");
  inv.order_cost = s.number("inventory.order_cost");
  inv.holding_cost = s.number("inventory.holding_cost");
  inv.penalty = s.number("inventory.penalty");
  inv.lambda = s.number("inventory.lambda");
  inv.u_max = s.raw("inventory.u_max").empty() ? inv.capacity : s.count("inventory.u_max");
  if (inv.capacity < 1) bad("inventory.capacity", "must be at least 1");
  if (inv.order_cost < 0) bad("inventory.order_cost", "must be non-negative");
  if (inv.holding_cost < 0) bad("inventory.holding_cost", "must be non-negative");
  if (inv.penalty < 0) bad("inventory.penalty", "must be non-negative");
  if (!(inv.lambda >= 0) || !std::isfinite(inv.lambda)) bad("inventory.lambda", "must be non-negative");
  c.initial_state = s.count("inventory.initial_state");
  if (c.initial_state > inv.capacity) bad("inventory.initial_state", "must not exceed the capacity");

  const auto& kind = s.raw("change.kind");
  const double rho = s.number("change.rho");
  if (kind == "geometric") {
    if (!(rho > 0 && rho < 1)) bad("change.rho", "must lie in (0, 1)");
    c.change = inventory::ChangeSpec::geometric(rho);
  } else if (kind == "fixed") {
    c.change = inventory::ChangeSpec::fixed(s.count("change.gamma"));
  } else if (kind == "never") {
    c.change = inventory::ChangeSpec::never();
  } else {
    bad("change.kind", "expected geometric, fixed or never, got '" + kind + "'");
  }

  c.detector.kind = detector_kind(s, "detector.kind");
  c.detector.rho = s.raw("detector.rho").empty() ? rho : s.number("detector.rho");
  c.detector.window = s.count("detector.window");
  c.detector.eps_prob = s.number("detector.eps_prob");
  if (c.detector.kind == DetectorKind::shiryaev && !(c.detector.rho > 0 && c.detector.rho < 1)) {
    bad("detector.rho", "must lie in (0, 1) for the shiryaev detector");
  }
  if (c.detector.window < 1) bad("detector.window", "must be at least 1");
  if (!(c.detector.eps_prob > 0 && c.detector.eps_prob < 1)) bad("detector.eps_prob", "must lie in (0, 1)");

  c.policies = policy_list(s, "experiment.policies");
  c.beta = s.number("experiment.beta");
  if (!(c.beta >= 0 && c.beta < 1)) bad("experiment.beta", "must lie in [0, 1)");
  c.horizon = s.count("experiment.horizon");
  if (c.horizon < 1) bad("experiment.horizon", "must be at least 1");
  c.runs = s.count("experiment.runs");
  if (c.runs < 1) bad("experiment.runs", "must be at least 1");
  c.seed = s.seed("experiment.seed");
  c.workers = s.count("experiment.workers");
  if (c.workers < 1) bad("experiment.workers", "must be at least 1");
  c.out = s.raw("experiment.out");
  if (c.out.empty()) bad("experiment.out", "must not be empty");
  c.solver_tol = s.number("solver.tol");
  if (!(c.solver_tol > 0)) bad("solver.tol", "must be positive");

  c.grid.a_min = s.number("grid.a_min");
  c.grid.a_max = s.number("grid.a_max");
  c.grid.a_points = s.count("grid.a_points");
  c.grid.b_points = s.count("grid.b_points");
  c.grid.b_decades = s.number("grid.b_decades");
  if (!(c.grid.a_min > 0)) bad("grid.a_min", "must be positive");
  if (!(c.grid.a_max >= c.grid.a_min)) bad("grid.a_max", "must be at least grid.a_min");
  if (c.grid.a_points < 1) bad("grid.a_points", "must be at least 1");
  if (!(c.grid.b_decades >= 0)) bad("grid.b_decades", "must be non-negative");

  const auto& mode = s.raw("thresholds.mode");
  if (mode != "optimize" && mode != "fixed") bad("thresholds.mode", "expected optimize or fixed");
  c.thresholds.optimize = mode == "optimize";
  c.thresholds.a = s.number("thresholds.a");
  c.thresholds.b = s.number("thresholds.b");
  if (!(c.thresholds.a >= 0)) bad("thresholds.a", "must be non-negative");
  if (!(c.thresholds.b >= 0 && c.thresholds.b <= c.thresholds.a)) bad("thresholds.b", "must lie in [0, thresholds.a]");

  c.momdp_grid = s.count("momdp.grid_size");
  if (c.momdp_grid < 2) bad("momdp.grid_size", "must be at least 2");
  c.momdp_tol = s.number("momdp.tol");
  if (!(c.momdp_tol > 0)) bad("momdp.tol", "must be positive");

  c.nonbayes_policies = policy_list(s, "nonbayes.policies");
  for (auto k : c.nonbayes_policies) {
    if (k != PolicyKind::loc && k != PolicyKind::tt && k != PolicyKind::kl) {
      bad("nonbayes.policies", "only loc, tt and kl have thresholds to calibrate");
    }
  }
  c.nonbayes_detector = detector_kind(s, "nonbayes.detector");
  if (c.nonbayes_detector == DetectorKind::glr) bad("nonbayes.detector", "glr is not supported here");
  c.alphas = s.numbers("nonbayes.alphas");
  const auto& amode = s.raw("nonbayes.alpha_mode");
  if (amode != "relative" && amode != "absolute") bad("nonbayes.alpha_mode", "expected relative or absolute");
  c.alpha_relative = amode == "relative";

  c.info_trajectory = s.raw("info.trajectory");
  c.info_steps = s.count("info.steps");
  c.info_gamma = s.count("info.gamma");
  c.info_policy = s.raw("info.policy");
  if (c.info_policy != "pi0" && c.info_policy != "kl") bad("info.policy", "expected pi0 or kl");
  return c;
}

}  // namespace qcdmdp::app
