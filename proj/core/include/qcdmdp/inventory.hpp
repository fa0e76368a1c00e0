#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qcdmdp/mdp.hpp"
#include "qcdmdp/random.hpp"
#include "qcdmdp/switching.hpp"

namespace qcdmdp::inventory {

struct Params {
  std::size_t capacity = 20;  // N
  double order_cost = 1.0;    // c, per unit ordered
  double holding_cost = 5.0;  // h, per unit left over
  double penalty = 100.0;     // p, per unit of lost demand
  double lambda = 2.0;        // Poisson rate before the change
  std::size_t u_max = 20;     // Uniform{0..u_max} demand after the change

  /// Throws ArgumentError when a field is out of range.
  void validate() const;
};

struct Demand {
  enum class Kind { poisson, uniform };
  Kind kind = Kind::poisson;
  double lambda = 2.0;
  std::size_t u_max = 0;

  static Demand poisson(double rate) { return {Kind::poisson, rate, 0}; }
  static Demand uniform(std::size_t upper) { return {Kind::uniform, 0.0, upper}; }
};

/// Poisson truncation point: max(60, ceil(lambda + 10 sqrt(lambda))).
std::size_t poisson_cap(double lambda);

/// Demand pmf on {0, 1, ...}. Poisson mass beyond the cap is folded into the cap.
std::vector<double> demand_pmf(const Demand& demand);

/// Inventory MDP: states 0..N, actions a in 0..N-s at state s, next state
/// max(0, s + a - w) and expected cost c a + h E(s+a-w)^+ + p E(w-s-a)^+.
TabularMdp build_inventory_mdp(const Params& params, const Demand& demand);

/// One step of the inventory dynamics with demand drawn from `demand_cdf`
/// (cumulative of demand_pmf). Returns (next state, realized demand).
std::pair<std::size_t, std::size_t> simulate_step(std::size_t s, std::size_t a,
                                                  std::span<const double> demand_cdf,
                                                  Engine& rng);

/// When the demand distribution changes.
struct ChangeSpec {
  enum class Kind { geometric, fixed, never };
  Kind kind = Kind::geometric;
  double rho = 0.01;
  std::size_t gamma = 1;

  static ChangeSpec geometric(double rho) { return {Kind::geometric, rho, 1}; }
  static ChangeSpec fixed(std::size_t gamma) { return {Kind::fixed, 0.0, gamma}; }
  static ChangeSpec never() { return {Kind::never, 0.0, kNoChange}; }

  void validate() const;
};

/// Geometric(rho) on {1, 2, ...}, the fixed value, or kNoChange.
std::size_t sample_change_point(const ChangeSpec& spec, Engine& rng);

}  // namespace qcdmdp::inventory
