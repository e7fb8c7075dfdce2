// Serial reference against the OpenMP kernels. Thread count is the second
// argument; 1 selects the serial path. Times are wall clock.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ala/core/rng.hpp"
#include "ala/kernels/kernels.hpp"

using namespace ala;

namespace {

Matrix points(Eigen::Index n, Eigen::Index dim) {
  Rng rng(7);
  Matrix x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return x;
}

std::vector<int> labels(Eigen::Index n) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 10);
  return y;
}

void BM_PairwiseDistances(benchmark::State& state) {
  const Matrix x = points(state.range(0), 16);
  const kernels::Exec exec{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_sq_distances(x, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) - 1) / 2);
}

void BM_KnnLabelHits(benchmark::State& state) {
  const Matrix d = kernels::pairwise_sq_distances(points(state.range(0), 16));
  const auto y = labels(state.range(0));
  const kernels::Exec exec{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_label_hits(d, y, 1, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateGrid(benchmark::State& state) {
  const auto axis = [](int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (n - 1);
    return v;
  };
  const auto xs = axis(static_cast<int>(state.range(0)));
  const kernels::Exec exec{static_cast<int>(state.range(1))};
  // Stand-in for a loss evaluation: a few hundred flops per cell.
  const auto f = [](double x, double y) {
    double s = 0.0;
    for (int k = 1; k <= 64; ++k) s += std::sin(k * x) * std::cos(k * y) / k;
    return s;
  };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::evaluate_grid(f, xs, xs, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_PairwiseDistances)->ArgsProduct({{256, 1024}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KnnLabelHits)->ArgsProduct({{256, 1024}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EvaluateGrid)->ArgsProduct({{21, 41}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
