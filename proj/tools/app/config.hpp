#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcdmdp/harness.hpp"
#include "qcdmdp/inventory.hpp"

namespace qcdmdp::app {

/// Bad configuration: unknown key, unparsable value, value out of range.
/// The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string key;  // "section.name"
  std::string default_value;
  std::string unit;
  std::string help;
};

/// Every recognized configuration key.
const std::vector<KeySpec>& schema();
/// The schema as a help table.
std::string schema_help();

/// Flat key/value settings: schema defaults, then the INI file, then overrides.
class Settings {
 public:
  Settings();
  void load_ini(const std::filesystem::path& path);
  /// "section.name=value"
  void set_assignment(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

struct ThresholdSetting {
  bool optimize = true;
  double a = 0.0;
  double b = 0.0;
};

struct ExperimentConfig {
  inventory::Params inventory;
  std::size_t initial_state = 0;
  inventory::ChangeSpec change;
  DetectorConfig detector;
  std::vector<PolicyKind> policies;
  double beta = 0.99;
  std::size_t horizon = 1000;
  std::size_t runs = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::filesystem::path out = "out";
  double solver_tol = 1e-8;
  GridSpec grid;
  ThresholdSetting thresholds;
  std::size_t momdp_grid = 201;
  double momdp_tol = 1e-6;
  std::vector<PolicyKind> nonbayes_policies;
  DetectorKind nonbayes_detector = DetectorKind::sr;
  std::vector<double> alphas;
  bool alpha_relative = true;
  std::string info_trajectory;
  std::size_t info_steps = 30;
  std::size_t info_gamma = 10;
  std::string info_policy = "pi0";

  MonteCarloOptions monte_carlo() const;
};

/// Builds and validates the typed config; errors name the offending key.
ExperimentConfig build_config(const Settings& settings);

}  // namespace qcdmdp::app
