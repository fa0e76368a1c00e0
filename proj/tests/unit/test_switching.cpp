#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "../support/oracles.hpp"
#include "qcdmdp/error.hpp"
#include "qcdmdp/harness.hpp"
#include "qcdmdp/switching.hpp"

using namespace qcdmdp;

namespace {

struct Trace {
  std::vector<std::size_t> actions;
  std::vector<std::size_t> states;
  std::vector<Phase> phases;
  std::vector<double> levels;
};

// Drives `ctrl` through the scenario with change at `gamma`, recording everything.
Trace drive(const Scenario& sc, SwitchController& ctrl, std::size_t gamma, std::size_t horizon,
            std::uint64_t seed) {
  Engine dyn = make_engine(seed, 0, Stream::dynamics);
  Trace tr;
  std::size_t s = sc.initial_state();
  std::optional<Transition> last;
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t a = ctrl.step(s, last, k);
    tr.states.push_back(s);
    tr.actions.push_back(a);
    tr.phases.push_back(ctrl.phase());
    tr.levels.push_back(ctrl.detector().level());
    const std::size_t next = sc.sample_next(k >= gamma, s, a, uniform01(dyn));
    last = Transition{s, a, next};
    s = next;
  }
  return tr;
}

const Scenario& small_inventory() {
  static const Scenario sc = [] {
    inventory::Params p;
    p.capacity = 10;
    p.u_max = 10;
    return make_inventory_scenario(p, 0.99);
  }();
  return sc;
}

ControllerConfig config(ControllerKind kind, double a, double b = 0.0) {
  ControllerConfig c;
  c.kind = kind;
  c.threshold_a = a;
  c.threshold_b = b;
  return c;
}

// Four states, one action; the log ratio of landing in state i is x[i] for i < 3.
std::shared_ptr<const ModelFamily> scripted_family(const std::array<double, 3>& x) {
  std::vector<double> q{0.3, 0.3, 0.3, 0.1};
  std::vector<double> p(4);
  double used = 0.0;
  for (int i = 0; i < 3; ++i) used += p[i] = q[i] * std::exp(-x[i]);
  p[3] = 1.0 - used;
  std::vector<double> k0, k1;
  for (int s = 0; s < 4; ++s) {
    k0.insert(k0.end(), p.begin(), p.end());
    k1.insert(k1.end(), q.begin(), q.end());
  }
  std::vector<std::vector<std::size_t>> feas(4, {0});
  TabularMdp pre(4, 1, feas, k0, std::vector<double>(4, 0.0));
  TabularMdp post(4, 1, feas, k1, std::vector<double>(4, 0.0));
  StationaryPolicy zero{{0, 0, 0, 0}};
  return ModelFamily::pair(pre, post, zero, zero);
}

}  // namespace

TEST(KlPolicy, HandInstance) {
  // State 0: action 0 is uninformative, action 1 has KL 0.368.
  TabularMdp pre(2, 2, {{0, 1}, {0}}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0, 0}, {0, 0, 0, 0});
  TabularMdp post(2, 2, {{0, 1}, {0}}, {0.5, 0.5, 0.9, 0.1, 0.5, 0.5, 0, 0}, {0, 0, 0, 0});
  EXPECT_EQ(kl_policy(pre, post).action, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(kl_policy(pre, pre).action, (std::vector<std::size_t>{0, 0}));
}

TEST(KlPolicy, PerStateArgmax) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    auto pre = oracle::random_mdp(rng, 4, 3, true);
    auto post = oracle::perturbed_kernel(rng, pre);
    auto pi = kl_policy(pre, post);
    for (std::size_t s = 0; s < 4; ++s) {
      std::size_t best = pre.feasible_actions(s)[0];
      double best_kl = -1.0;
      for (std::size_t a = 0; a < 3; ++a) {
        if (!pre.is_feasible(s, a)) continue;
        const double d = oracle::kl(oracle::row(post, s, a), oracle::row(pre, s, a));
        if (d > best_kl) {
          best_kl = d;
          best = a;
        }
      }
      EXPECT_EQ(pi(s), best);
    }
  }
}

TEST(WorstCaseKlPolicy, SingletonAndExhaustive) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    auto pre = oracle::random_mdp(rng, 2, 3);
    std::vector<TabularMdp> grid{oracle::perturbed_kernel(rng, pre), oracle::perturbed_kernel(rng, pre)};
    EXPECT_EQ(worst_case_kl_policy(pre, std::span<const TabularMdp>(grid.data(), 1)),
              kl_policy(pre, grid[0]));
    auto pi = worst_case_kl_policy(pre, grid);
    for (std::size_t s = 0; s < 2; ++s) {
      double table[3][2];
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t c = 0; c < 2; ++c) table[a][c] = oracle::kl(oracle::row(grid[c], s, a), oracle::row(pre, s, a));
      }
      std::size_t best = 0;
      for (std::size_t a = 1; a < 3; ++a) {
        if (std::min(table[a][0], table[a][1]) > std::min(table[best][0], table[best][1])) best = a;
      }
      EXPECT_EQ(pi(s), best);
    }
  }
  auto pre = oracle::random_mdp(rng, 2, 2);
  EXPECT_THROW(worst_case_kl_policy(pre, {}), ArgumentError);
}

TEST(WorstCaseKlPolicy, UninformativeCandidateZeroesAction) {
  // Candidate 1 equals pre on action 1, so action 1 scores 0 in the worst case.
  TabularMdp pre2(2, 2, {{0, 1}, {0, 1}}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 0});
  TabularMdp c0(2, 2, {{0, 1}, {0, 1}}, {0.8, 0.2, 0.99, 0.01, 0.8, 0.2, 0.99, 0.01}, {0, 0, 0, 0});
  TabularMdp c1(2, 2, {{0, 1}, {0, 1}}, {0.7, 0.3, 0.5, 0.5, 0.7, 0.3, 0.5, 0.5}, {0, 0, 0, 0});
  std::vector<TabularMdp> grid{c0, c1};
  EXPECT_EQ(kl_policy(pre2, c0).action, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(worst_case_kl_policy(pre2, grid).action, (std::vector<std::size_t>{0, 0}));
}

TEST(SwitchController, ScriptedPhaseBands) {
  // With window 1, W_n = max(x_n, x_{n-1} + x_n): 1.2, 0.4, 7.
  auto fam = scripted_family({1.2, -0.8, 7.0});
  ControllerConfig c = config(ControllerKind::tt, 5.0, 1.0);
  c.detector.kind = DetectorKind::cusum;
  c.detector.window = 1;
  SwitchController ctrl(fam, c);
  ctrl.step(3, std::nullopt, 0);
  EXPECT_EQ(ctrl.phase(), Phase::pre);
  const std::size_t path[] = {0, 1, 2};
  const Phase expected[] = {Phase::probe, Phase::pre, Phase::post};
  std::size_t s = 3;
  for (std::size_t k = 0; k < 3; ++k) {
    ctrl.step(path[k], Transition{s, 0, path[k]}, k + 1);
    s = path[k];
    EXPECT_EQ(ctrl.phase(), expected[k]) << "step " << k + 1;
  }
  EXPECT_EQ(ctrl.switch_time(), std::optional<std::size_t>(3));
  EXPECT_NEAR(ctrl.detector().level(), 7.0, 1e-9);
}

TEST(SwitchController, Validation) {
  auto fam = scripted_family({1.0, 1.0, 1.0});
  SwitchController bad(fam, config(ControllerKind::tt, 1.0, 2.0));
  EXPECT_THROW(bad.step(0, std::nullopt, 0), StateError);
  SwitchController ok(fam, config(ControllerKind::tt, 10.0, 2.0));
  ok.step(0, std::nullopt, 0);
  EXPECT_THROW(ok.step(0, std::nullopt, 1), ArgumentError);
  EXPECT_EQ(normalized(config(ControllerKind::loc, 7.0, 0.0)).threshold_b, 7.0);
  EXPECT_EQ(normalized(config(ControllerKind::kl, 7.0, 3.0)).threshold_b, 0.0);
}

TEST(SwitchController, ReductionIdentities) {
  const auto& sc = small_inventory();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t gamma = 20 + 7 * seed;
    const double a = std::pow(10.0, 1.0 + 0.1 * static_cast<double>(seed % 40));
    SwitchController tt_eq(sc.family_ptr(), config(ControllerKind::tt, a, a));
    SwitchController loc(sc.family_ptr(), config(ControllerKind::loc, a));
    EXPECT_EQ(drive(sc, tt_eq, gamma, 300, seed).actions, drive(sc, loc, gamma, 300, seed).actions);

    SwitchController tt_zero(sc.family_ptr(), config(ControllerKind::tt, a, 0.0));
    SwitchController kl(sc.family_ptr(), config(ControllerKind::kl, a));
    auto t1 = drive(sc, tt_zero, gamma, 300, seed);
    EXPECT_EQ(t1.actions, drive(sc, kl, gamma, 300, seed).actions);
    // B = 0 probes from the first update until the stop.
    for (std::size_t k = 1; k < t1.phases.size(); ++k) EXPECT_NE(t1.phases[k], Phase::pre);
  }
}

TEST(SwitchController, PhaseActionsAndAbsorption) {
  const auto& sc = small_inventory();
  const auto& fam = sc.family();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SwitchController ctrl(sc.family_ptr(), config(ControllerKind::tt, 1e3, 5.0));
    auto tr = drive(sc, ctrl, 50, 400, seed);
    bool seen_post = false;
    for (std::size_t k = 0; k < tr.actions.size(); ++k) {
      const std::size_t s = tr.states[k];
      switch (tr.phases[k]) {
        case Phase::pre:
          ASSERT_FALSE(seen_post);
          EXPECT_EQ(tr.actions[k], fam.optimal_policy(0)(s));
          break;
        case Phase::probe:
          ASSERT_FALSE(seen_post);
          EXPECT_EQ(tr.actions[k], fam.probe_policy(0)(s));
          break;
        case Phase::post:
          seen_post = true;
          EXPECT_EQ(tr.actions[k], fam.optimal_policy(1)(s));
          break;
      }
    }
  }
}

TEST(SwitchController, DetectorMatchesStandalone) {
  const auto& sc = small_inventory();
  const auto& ratios = sc.family().log_ratios(0, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SwitchController ctrl(sc.family_ptr(), config(ControllerKind::tt, 1e12, 50.0));
    auto tr = drive(sc, ctrl, 100, 300, seed);
    DetectorState alone(DetectorKind::shiryaev);
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      alone = shiryaev_step_log(alone, ratios(tr.states[k - 1], tr.actions[k - 1], tr.states[k]), 0.01);
      if (tr.phases[k] == Phase::post) break;
      ASSERT_DOUBLE_EQ(tr.levels[k], alone.level());
    }
  }
}

TEST(SwitchController, OracleSwitchesAtGamma) {
  const auto& sc = small_inventory();
  ControllerConfig c = config(ControllerKind::oracle, 0.0);
  c.oracle_gamma = 37;
  SwitchController ctrl(sc.family_ptr(), c);
  auto tr = drive(sc, ctrl, 37, 100, 3);
  for (std::size_t k = 0; k < 100; ++k) {
    const auto& pi = sc.family().optimal_policy(k < 37 ? 0 : 1);
    EXPECT_EQ(tr.actions[k], pi(tr.states[k]));
  }
  EXPECT_EQ(ctrl.switch_time(), std::optional<std::size_t>(37));
}

TEST(SwitchController, RandomIsUniformOverFeasibleActions) {
  const auto& sc = small_inventory();
  SwitchController ctrl(sc.family_ptr(), config(ControllerKind::random, 0.0), make_engine(5, 0, Stream::policy));
  // State 6 of the N = 10 instance admits actions 0..4.
  std::map<std::size_t, int> counts;
  const int n = 50000;
  for (int k = 0; k < n; ++k) counts[ctrl.step(6, std::nullopt, 0)]++;
  ASSERT_EQ(counts.size(), 5u);
  for (const auto& [a, cnt] : counts) {
    EXPECT_LE(a, 4u);
    const double p = 0.2, sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(cnt, n * p, 4 * sd);
  }
}

TEST(GlrReset, TwoChangePoints) {
  // Two clearly separated models on three states; the process goes 0 -> 1 -> 0.
  std::vector<std::vector<std::size_t>> feas(3, {0, 1});
  std::vector<double> k0, k1;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      k0.insert(k0.end(), {0.7, 0.2, 0.1});
      k1.insert(k1.end(), {0.1, 0.2, 0.7});
    }
  }
  std::vector<double> cost(6, 0.0);
  TabularMdp m0(3, 2, feas, k0, cost), m1(3, 2, feas, k1, cost);
  StationaryPolicy p0{{0, 0, 0}}, p1{{1, 1, 1}};
  auto fam = std::make_shared<const ModelFamily>(std::vector<TabularMdp>{m0, m1},
                                                 std::vector<StationaryPolicy>{p0, p1},
                                                 std::vector<std::vector<double>>{{0.0}, {1.0}});
  ControllerConfig c = config(ControllerKind::loc, 15.0);
  c.detector.kind = DetectorKind::glr;
  c.detector.window = 60;
  c.detector.min_separation = 0.5;

  Engine rng = make_engine(9, 0, Stream::dynamics);
  auto regime_at = [](std::size_t k) { return k < 300 ? 0 : k < 700 ? 1 : 0; };
  std::vector<std::pair<std::size_t, std::size_t>> stops;  // (time, detected model)
  SwitchController ctrl(fam, c);
  std::size_t s = 0, offset = 0;
  std::optional<Transition> last;
  for (std::size_t k = 0; k < 1200; ++k) {
    ctrl.step(s, last, k - offset);
    if (ctrl.phase() == Phase::post) {
      stops.emplace_back(k, *ctrl.detected_model());
      ctrl = glr_reset(ctrl);
      EXPECT_EQ(ctrl.detector().steps(), 0u);
      EXPECT_FALSE(ctrl.detector().stopped());
      offset = k;
      ctrl.step(s, std::nullopt, 0);
    }
    const std::size_t a = ctrl.family()->optimal_policy(ctrl.pre_index())(s);
    const auto& m = fam->model(regime_at(k));
    const std::size_t next = sample_index(cumulative(m.transition(s, a)), uniform01(rng));
    last = Transition{s, a, next};
    s = next;
  }
  ASSERT_EQ(stops.size(), 2u);
  EXPECT_GE(stops[0].first, 300u);
  EXPECT_LT(stops[0].first, 400u);
  EXPECT_EQ(stops[0].second, 1u);
  EXPECT_GE(stops[1].first, 700u);
  EXPECT_LT(stops[1].first, 800u);
  EXPECT_EQ(stops[1].second, 0u);
}

TEST(GlrReset, SingleChangeNeedsNoReset) {
  const auto& sc = small_inventory();
  SwitchController ctrl(sc.family_ptr(), config(ControllerKind::loc, 1e4));
  EXPECT_THROW(glr_reset(ctrl), StateError);
}
