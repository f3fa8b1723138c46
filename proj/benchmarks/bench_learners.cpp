#include <benchmark/benchmark.h>

#include "wifimode/features.hpp"
#include "wifimode/mlp.hpp"
#include "wifimode/relieff.hpp"
#include "wifimode/simulator.hpp"
#include "wifimode/split.hpp"
#include "wifimode/trees.hpp"

using namespace wifimode;

namespace {

// 240-row training split of the default simulation, shared by every benchmark.
const Dataset& training_rows() {
  static const Dataset train = [] {
    const auto sim = simulate_experiment(SimConfig{});
    const auto built =
        build_dataset(segment_trips(sim.detections, sim.truth), GapTable::from_geometry(LoopGeometry{}));
    return stratified_split(built.dataset, 0.4, 1).train;
  }();
  return train;
}

void BM_DecisionTree(benchmark::State& state) {
  const Dataset& train = training_rows();
  for (auto _ : state) benchmark::DoNotOptimize(train_tree(train, TreeParams{}));
}
BENCHMARK(BM_DecisionTree)->Unit(benchmark::kMillisecond);

void BM_RandomForest(benchmark::State& state) {
  const Dataset& train = training_rows();
  EnsembleParams e;
  e.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(train, e, TreeParams{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomForest)->Arg(50)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_BaggedTrees(benchmark::State& state) {
  const Dataset& train = training_rows();
  EnsembleParams e;
  e.n_trees = 200;
  e.features_per_tree = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_bagged(train, e, TreeParams{}));
}
BENCHMARK(BM_BaggedTrees)->Unit(benchmark::kMillisecond);

void BM_ReliefF(benchmark::State& state) {
  const Dataset& train = training_rows();
  ReliefFParams p;
  p.k_neighbors = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relieff_rank(train, p));
}
BENCHMARK(BM_ReliefF)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MlpEpoch(benchmark::State& state) {
  const Dataset& train = training_rows();
  MlpParams p;
  p.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_mlp(train, p));
}
BENCHMARK(BM_MlpEpoch)->Unit(benchmark::kMillisecond);

void BM_MlpGradient(benchmark::State& state) {
  const Dataset& train = training_rows();
  MlpParams p;
  auto model = init_mlp(kNumFeatures, kNumModes, p, 3);
  fit_standardization(model, train);
  std::vector<std::size_t> rows(20);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const Dataset batch = train.select(rows);
  MlpGradients g;
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(model, batch, &g));
}
BENCHMARK(BM_MlpGradient);

}  // namespace
