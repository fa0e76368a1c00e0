#include "qcdmdp/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcdmdp/error.hpp"

namespace qcdmdp::inventory {

void Params::validate() const {
  if (capacity < 1) throw ArgumentError("inventory capacity N must be at least 1");
  if (order_cost < 0.0 || holding_cost < 0.0 || penalty < 0.0) {
    throw ArgumentError("inventory costs c, h, p must be non-negative");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("Poisson rate lambda must be non-negative and finite");
  }
}

std::size_t poisson_cap(double lambda) {
  return std::max<std::size_t>(60, static_cast<std::size_t>(std::ceil(lambda + 10.0 * std::sqrt(lambda))));
}

std::vector<double> demand_pmf(const Demand& demand) {
  if (demand.kind == Demand::Kind::uniform) {
    return std::vector<double>(demand.u_max + 1, 1.0 / static_cast<double>(demand.u_max + 1));
  }
  if (!(demand.lambda >= 0.0) || !std::isfinite(demand.lambda)) {
    throw ArgumentError("Poisson rate must be non-negative and finite");
  }
  if (demand.lambda == 0.0) return {1.0};
  const std::size_t cap = poisson_cap(demand.lambda);
  std::vector<double> pmf(cap + 1);
  double head = 0.0;
  for (std::size_t w = 0; w < cap; ++w) {
    const double log_p = -demand.lambda + static_cast<double>(w) * std::log(demand.lambda) -
                         std::lgamma(static_cast<double>(w) + 1.0);
    pmf[w] = std::exp(log_p);
    head += pmf[w];
  }
  pmf[cap] = std::max(0.0, 1.0 - head);
  return pmf;
}

TabularMdp build_inventory_mdp(const Params& params, const Demand& demand) {
  params.validate();
  const std::size_t n_states = params.capacity + 1;
  const std::size_t n_actions = params.capacity + 1;
  const auto pmf = demand_pmf(demand);

  std::vector<std::vector<std::size_t>> feasible(n_states);
  std::vector<double> kernel(n_states * n_actions * n_states, 0.0);
  std::vector<double> cost(n_states * n_actions, 0.0);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; s + a <= params.capacity; ++a) {
      feasible[s].push_back(a);
      const std::size_t stock = s + a;
      double* row = kernel.data() + (s * n_actions + a) * n_states;
      double leftover = 0.0;
      double lost = 0.0;
      for (std::size_t w = 0; w < pmf.size(); ++w) {
        const std::size_t next = w >= stock ? 0 : stock - w;
        row[next] += pmf[w];
        if (w < stock) leftover += pmf[w] * static_cast<double>(stock - w);
        else lost += pmf[w] * static_cast<double>(w - stock);
      }
      cost[s * n_actions + a] = params.order_cost * static_cast<double>(a) +
                                params.holding_cost * leftover + params.penalty * lost;
    }
  }
  return TabularMdp(n_states, n_actions, std::move(feasible), std::move(kernel), std::move(cost));
}

std::pair<std::size_t, std::size_t> simulate_step(std::size_t s, std::size_t a,
                                                  std::span<const double> demand_cdf,
                                                  Engine& rng) {
  const std::size_t w = sample_index(demand_cdf, uniform01(rng));
  const std::size_t stock = s + a;
  return {w >= stock ? 0 : stock - w, w};
}

void ChangeSpec::validate() const {
  if (kind == Kind::geometric && !(rho > 0.0 && rho < 1.0)) {
    throw ArgumentError("geometric change prior needs rho in (0, 1)");
  }
}

std::size_t sample_change_point(const ChangeSpec& spec, Engine& rng) {
  switch (spec.kind) {
    case ChangeSpec::Kind::fixed: return spec.gamma;
    case ChangeSpec::Kind::never: return kNoChange;
    case ChangeSpec::Kind::geometric: break;
  }
  spec.validate();
  // Inverse CDF: P(Gamma > k) = (1 - rho)^k.
  const double u = uniform01(rng);
  const double k = std::ceil(std::log1p(-u) / std::log1p(-spec.rho));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

}  // namespace qcdmdp::inventory
