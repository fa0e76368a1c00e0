#include <benchmark/benchmark.h>

#include <random>

#include "qcdmdp/detectors.hpp"
#include "qcdmdp/information.hpp"
#include "qcdmdp/inventory.hpp"
#include "qcdmdp/harness.hpp"
#include "qcdmdp/momdp.hpp"
#include "qcdmdp/solvers.hpp"

using namespace qcdmdp;

namespace {

std::vector<double> log_ratios(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

inventory::Params params(std::size_t n) {
  inventory::Params p;
  p.capacity = n;
  p.u_max = n;
  return p;
}

void BM_ShiryaevStep(benchmark::State& state) {
  const auto x = log_ratios(4096);
  std::size_t i = 0;
  DetectorState st;
  for (auto _ : state) {
    st.update_shiryaev(x[i++ & 4095], 0.01);
    benchmark::DoNotOptimize(st.level());
  }
}
BENCHMARK(BM_ShiryaevStep);

void BM_CusumStep(benchmark::State& state) {
  const auto x = log_ratios(4096);
  std::size_t i = 0;
  DetectorState st(DetectorKind::cusum, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    st.update_windowed(std::span<const double>(&x[i++ & 4095], 1));
    benchmark::DoNotOptimize(st.level());
  }
}
BENCHMARK(BM_CusumStep)->Arg(20)->Arg(200);

void BM_ValueIteration(benchmark::State& state) {
  const auto mdp = inventory::build_inventory_mdp(params(static_cast<std::size_t>(state.range(0))),
                                                  inventory::Demand::poisson(2.0));
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(mdp, 0.99, 1e-8).iterations);
}
BENCHMARK(BM_ValueIteration)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MaxInfoNumber(benchmark::State& state) {
  const auto p = params(20);
  const auto pre = inventory::build_inventory_mdp(p, inventory::Demand::poisson(2.0));
  const auto post = inventory::build_inventory_mdp(p, inventory::Demand::uniform(20));
  for (auto _ : state) benchmark::DoNotOptimize(max_info_number(pre, post).value);
}
BENCHMARK(BM_MaxInfoNumber)->Unit(benchmark::kMillisecond);

void BM_BeliefGridSolve(benchmark::State& state) {
  const auto p = params(20);
  const auto pomdp = build_pomdp(inventory::build_inventory_mdp(p, inventory::Demand::poisson(2.0)),
                                 inventory::build_inventory_mdp(p, inventory::Demand::uniform(20)), 0.01);
  BeliefGridOptions opt;
  opt.grid_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(belief_grid_solve(pomdp, opt).value.data());
}
BENCHMARK(BM_BeliefGridSolve)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_Episode(benchmark::State& state) {
  static const Scenario sc = make_inventory_scenario(params(20), 0.99);
  PolicySpec spec;
  spec.kind = PolicyKind::tt;
  spec.threshold_a = 1e4;
  spec.threshold_b = 10;
  EpisodeOptions opt;
  std::size_t run = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_run(sc, spec, inventory::ChangeSpec::geometric(0.01), opt, 1, run++).discounted_cost);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * opt.horizon));
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
