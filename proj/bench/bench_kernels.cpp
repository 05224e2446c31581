#include <benchmark/benchmark.h>

#include "ciflow/ci_solver.hpp"
#include "ciflow/parallel.hpp"

using namespace ciflow;

namespace {

Execution policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(thread_count()));
}

// One Monte-Carlo velocity estimate on a 16^2 grid with a Taylor-Green drift.
void BM_CiVelocity(benchmark::State& state) {
  const SpectralGrid g(2, 16);
  const auto u0 = taylor_green(g);
  const auto drift = DriftHistory::frozen(u0, 0.02);
  const auto noise = BrownianEnsemble::generate(static_cast<int>(state.range(1)), 20, 1e-3, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ci_velocity(drift, u0, 0.02, 1.0, noise, policy_of(state)));
  state.SetItemsProcessed(state.iterations() * g.size() * noise.samples());
  label(state);
}
BENCHMARK(BM_CiVelocity)->ArgsProduct({{0, 1}, {64, 256}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BackwardFlow(benchmark::State& state) {
  const SpectralGrid g(2, 16);
  const auto drift = DriftHistory::frozen(random_field(g, 2, 4, 1.0, true), 0.02);
  const auto noise = BrownianEnsemble::generate(static_cast<int>(state.range(1)), 20, 1e-3, 2, 2);
  const auto pts = grid_points(g);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_backward_flow(drift, 0.02, 1.0, pts, noise, policy_of(state)));
  state.SetItemsProcessed(state.iterations() * pts.size() * noise.samples());
  label(state);
}
BENCHMARK(BM_BackwardFlow)->ArgsProduct({{0, 1}, {64, 256}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_StabilityMetrics(benchmark::State& state) {
  const SpectralGrid g(2, 16);
  const auto tg = taylor_green(g);
  const auto limit = DriftHistory::frozen(tg, 0.02);
  const std::vector<DriftHistory> seq{DriftHistory::frozen(mollify(2, tg), 0.02),
                                      DriftHistory::frozen(mollify(4, tg), 0.02)};
  const auto noise = BrownianEnsemble::generate(static_cast<int>(state.range(1)), 20, 1e-3, 2, 3);
  const auto pts = grid_points(SpectralGrid(2, 8));
  for (auto _ : state)
    benchmark::DoNotOptimize(flow_stability_metrics(seq, limit, 0.02, 1.0, pts, noise, 2.0, policy_of(state)));
  label(state);
}
BENCHMARK(BM_StabilityMetrics)->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
