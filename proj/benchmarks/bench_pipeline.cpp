#include <benchmark/benchmark.h>

#include "wifimode/features.hpp"
#include "wifimode/simulator.hpp"

using namespace wifimode;

namespace {

void BM_SimulateExperiment(benchmark::State& state) {
  SimConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_experiment(cfg));
    ++cfg.seed;
  }
}
BENCHMARK(BM_SimulateExperiment)->Unit(benchmark::kMillisecond);

void BM_SimulateTrip(benchmark::State& state) {
  const SimConfig cfg;
  const auto mode = mode_from_index(static_cast<std::size_t>(state.range(0)));
  RngSeed seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trip(mode, 0, cfg, seed++));
}
BENCHMARK(BM_SimulateTrip)->DenseRange(0, 2);

void BM_ExtractFeatures(benchmark::State& state) {
  const auto sim = simulate_experiment(SimConfig{});
  const auto gaps = GapTable::from_geometry(LoopGeometry{});
  for (auto _ : state) {
    const auto trips = segment_trips(sim.detections, sim.truth);
    benchmark::DoNotOptimize(build_dataset(trips, gaps));
  }
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

}  // namespace
