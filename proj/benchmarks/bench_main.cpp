// Throughput numbers for the hot paths: trace synthesis, feature extraction,
// neighbor scoring, tree building.  Run manually; not part of ctest.

#include <benchmark/benchmark.h>

#include "oilsense/dataset.hpp"
#include "oilsense/features.hpp"
#include "oilsense/forest.hpp"
#include "oilsense/knn.hpp"
#include "oilsense/logistic.hpp"
#include "oilsense/resonator.hpp"
#include "oilsense/rng.hpp"
#include "oilsense/svm.hpp"

using namespace oilsense;

namespace {

FeatureMatrix synthetic_matrix(std::size_t rows, std::size_t cols,
                               int classes, std::uint64_t seed) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  for (std::size_t c = 0; c < cols; ++c)
    m.feature_names.push_back("f" + std::to_string(c));
  Rng rng(seed);
  m.values.resize(rows * cols);
  m.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    int label = static_cast<int>(rng.below(classes));
    m.labels[r] = label;
    for (std::size_t c = 0; c < cols; ++c)
      m.values[r * cols + c] = label * 0.8 + rng.gaussian(1.0);
  }
  for (int c = 0; c < classes; ++c) m.labels[c] = c;
  return m;
}

void bm_trace(benchmark::State& state) {
  auto resonator = default_resonator();
  auto oil = default_material_library()[1];
  auto grid = uniform_grid(1.0e9, 2.8e9, state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        s21_response(resonator, oil, 1.5, grid, 5e-4, seed++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_trace)->Arg(451)->Arg(1801);

void bm_extract(benchmark::State& state) {
  auto resonator = default_resonator();
  auto oil = default_material_library()[2];
  auto grid = uniform_grid(1.0e9, 2.8e9, 1801);
  Trace trace = s21_response(resonator, oil, 1.0, grid, 5e-4, 7);
  std::array<double, 2> f0s = {resonator.modes[0].f0_hz,
                               resonator.modes[1].f0_hz};
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract(trace, f0s));
  }
}
BENCHMARK(bm_extract);

void bm_knn_score(benchmark::State& state) {
  FeatureMatrix train = synthetic_matrix(state.range(0), 3, 4, 11);
  FeatureMatrix queries = synthetic_matrix(2000, 3, 4, 12);
  auto model = train_knn(train, KnnParams{5}, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->score(queries));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(bm_knn_score)->Arg(20000)->Arg(100000);

void bm_forest_train(benchmark::State& state) {
  FeatureMatrix data = synthetic_matrix(state.range(0), 8, 4, 21);
  ForestParams params;
  params.n_trees = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_forest(data, params, 42, 1));
  }
}
BENCHMARK(bm_forest_train)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void bm_svm_train(benchmark::State& state) {
  FeatureMatrix data = synthetic_matrix(state.range(0), 8, 4, 31);
  SvmParams params;
  params.max_passes = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_svm(data, params, 42, 1));
  }
}
BENCHMARK(bm_svm_train)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void bm_logistic_train(benchmark::State& state) {
  FeatureMatrix data = synthetic_matrix(state.range(0), 8, 4, 41);
  LogisticParams params;
  params.epochs = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_logistic(data, params, 42));
  }
}
BENCHMARK(bm_logistic_train)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
