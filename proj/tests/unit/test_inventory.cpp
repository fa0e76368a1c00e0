#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qcdmdp/error.hpp"
#include "qcdmdp/inventory.hpp"

using namespace qcdmdp;
using namespace qcdmdp::inventory;

namespace {

double poisson(double lambda, std::size_t w) {
  return std::exp(-lambda + static_cast<double>(w) * std::log(lambda) - std::lgamma(static_cast<double>(w) + 1.0));
}

// Demand pmf written out directly: Poisson up to the cap with the tail on the cap.
std::vector<double> reference_pmf(const Demand& d) {
  if (d.kind == Demand::Kind::uniform) return std::vector<double>(d.u_max + 1, 1.0 / static_cast<double>(d.u_max + 1));
  const std::size_t cap = std::max<std::size_t>(60, static_cast<std::size_t>(std::ceil(d.lambda + 10 * std::sqrt(d.lambda))));
  std::vector<double> p(cap + 1);
  double below = 0.0;
  for (std::size_t w = 0; w < cap; ++w) below += p[w] = poisson(d.lambda, w);
  p[cap] = 1.0 - below;
  return p;
}

}  // namespace

TEST(DemandPmf, ClosedForms) {
  auto u = demand_pmf(Demand::uniform(1));
  ASSERT_EQ(u.size(), 2u);
  EXPECT_DOUBLE_EQ(u[0], 0.5);
  EXPECT_DOUBLE_EQ(u[1], 0.5);
  auto p = demand_pmf(Demand::poisson(2.0));
  EXPECT_NEAR(p[0], std::exp(-2.0), 1e-15);
  double total = 0.0;
  for (double x : p) total += x;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_EQ(p.size(), poisson_cap(2.0) + 1);
  EXPECT_EQ(poisson_cap(2.0), 60u);
  EXPECT_EQ(poisson_cap(100.0), 200u);
}

TEST(InventoryMdp, StockoutCost) {
  Params prm;
  auto m = build_inventory_mdp(prm, Demand::poisson(2.0));
  EXPECT_NEAR(m.cost(0, 0), prm.penalty * 2.0, 1e-9);
}

TEST(InventoryMdp, ZeroDemandIsDeterministic) {
  Params prm;
  prm.capacity = 5;
  auto m = build_inventory_mdp(prm, Demand::uniform(0));
  for (std::size_t s = 0; s <= 5; ++s) {
    for (std::size_t a : m.feasible_actions(s)) {
      EXPECT_DOUBLE_EQ(m.probability(s, a, s + a), 1.0);
      EXPECT_NEAR(m.cost(s, a), prm.order_cost * a + prm.holding_cost * (s + a), 1e-12);
    }
  }
}

TEST(InventoryMdp, ActionSetsRespectCapacity) {
  Params prm;
  prm.capacity = 7;
  auto m = build_inventory_mdp(prm, Demand::poisson(2.0));
  EXPECT_EQ(m.n_states(), 8u);
  EXPECT_EQ(m.n_actions(), 8u);
  for (std::size_t s = 0; s <= 7; ++s) EXPECT_EQ(m.feasible_actions(s).size(), 8 - s);
}

TEST(InventoryMdp, MatchesDemandConvolution) {
  for (const Demand& d : {Demand::poisson(2.0), Demand::uniform(3), Demand::poisson(0.7), Demand::uniform(8)}) {
    for (std::size_t n : {3u, 6u}) {
      Params prm;
      prm.capacity = n;
      prm.penalty = 37.0;
      const auto pmf = reference_pmf(d);
      auto m = build_inventory_mdp(prm, d);
      for (std::size_t s = 0; s <= n; ++s) {
        for (std::size_t a = 0; a + s <= n; ++a) {
          std::vector<double> row(n + 1, 0.0);
          double holding = 0.0, lost = 0.0;
          const double y = static_cast<double>(s + a);
          for (std::size_t w = 0; w < pmf.size(); ++w) {
            const double dw = static_cast<double>(w);
            row[w >= s + a ? 0 : s + a - w] += pmf[w];
            holding += pmf[w] * std::max(0.0, y - dw);
            lost += pmf[w] * std::max(0.0, dw - y);
          }
          for (std::size_t t = 0; t <= n; ++t) EXPECT_NEAR(m.probability(s, a, t), row[t], 1e-12);
          const double c = prm.order_cost * static_cast<double>(a) + prm.holding_cost * holding + prm.penalty * lost;
          EXPECT_NEAR(m.cost(s, a), c, 1e-10);
          EXPECT_GT(m.cost(s, a), 0.0);
        }
      }
    }
  }
}

TEST(SimulateStep, Boundaries) {
  Engine rng(1);
  const std::vector<double> no_demand{1.0};
  auto [next, w] = simulate_step(2, 3, no_demand, rng);
  EXPECT_EQ(next, 5u);
  EXPECT_EQ(w, 0u);
  const std::vector<double> five{0, 0, 0, 0, 0, 1.0};
  auto [n2, w2] = simulate_step(1, 2, five, rng);
  EXPECT_EQ(n2, 0u);
  EXPECT_EQ(w2, 5u);
}

TEST(SimulateStep, FrequenciesMatchKernel) {
  Params prm;
  prm.capacity = 6;
  for (const Demand& d : {Demand::poisson(2.0), Demand::uniform(6)}) {
    auto m = build_inventory_mdp(prm, d);
    const auto pmf = demand_pmf(d);
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) cdf[i] = acc += pmf[i];
    cdf.back() = 1.0;
    Engine rng(77);
    for (auto [s, a] : {std::pair<std::size_t, std::size_t>{0, 3}, {2, 4}, {5, 0}}) {
      const int n = 100000;
      std::vector<int> counts(7, 0);
      for (int k = 0; k < n; ++k) counts[simulate_step(s, a, cdf, rng).first]++;
      for (std::size_t t = 0; t <= 6; ++t) {
        const double p = m.probability(s, a, t);
        const double sd = std::sqrt(n * p * (1 - p));
        EXPECT_NEAR(counts[t], n * p, 3 * sd + 1e-9) << "s=" << s << " a=" << a << " t=" << t;
      }
    }
  }
}

TEST(ChangePoint, Specs) {
  Engine rng(3);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(sample_change_point(ChangeSpec::fixed(1), rng), 1u);
    EXPECT_EQ(sample_change_point(ChangeSpec::never(), rng), kNoChange);
  }
  EXPECT_THROW(ChangeSpec::geometric(0.0).validate(), ArgumentError);
  EXPECT_THROW(ChangeSpec::geometric(1.0).validate(), ArgumentError);
}

TEST(ChangePoint, GeometricMean) {
  Engine rng(4);
  const int n = 100000;
  double sum = 0.0;
  std::size_t smallest = kNoChange;
  for (int k = 0; k < n; ++k) {
    const auto g = sample_change_point(ChangeSpec::geometric(0.01), rng);
    sum += static_cast<double>(g);
    smallest = std::min(smallest, g);
  }
  EXPECT_NEAR(sum / n, 100.0, 2.0);
  EXPECT_EQ(smallest, 1u);
}

TEST(Params, Validation) {
  Params p;
  p.lambda = -1.0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p.lambda = 0.0;
  EXPECT_NO_THROW(p.validate());
  p = Params{};
  p.capacity = 0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = Params{};
  p.penalty = -1;
  EXPECT_THROW(p.validate(), ArgumentError);
}

TEST(DemandPmf, DegenerateRegimesCoincide) {
  Params p;
  p.capacity = 6;
  p.lambda = 0.0;
  p.u_max = 0;
  EXPECT_EQ(demand_pmf(Demand::poisson(0.0)), std::vector<double>{1.0});
  const auto pre = build_inventory_mdp(p, Demand::poisson(0.0));
  const auto post = build_inventory_mdp(p, Demand::uniform(0));
  for (std::size_t s = 0; s < pre.n_states(); ++s) {
    for (std::size_t a : pre.feasible_actions(s)) {
      for (std::size_t t = 0; t < pre.n_states(); ++t) EXPECT_EQ(pre.probability(s, a, t), post.probability(s, a, t));
    }
  }
}
