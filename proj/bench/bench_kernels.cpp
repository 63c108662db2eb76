// Serial reference kernels against their OpenMP versions.
// Run with OMP_NUM_THREADS to vary the worker count.

#include <benchmark/benchmark.h>

#include <random>

#include "grnn/kernels.hpp"
#include "grnn/pca.hpp"
#include "grnn/slic.hpp"

using namespace grnn;

namespace {

FeatureCube features(int h, int w, int b) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureCube cube(h, w, b);
  for (auto& v : cube.data) v = g(rng);
  return cube;
}

HsiCube cube(int h, int w, int b) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  HsiCube c(h, w, b);
  for (auto& v : c.data) v = u(rng);
  return c;
}

template <class F>
void mlp_forward(benchmark::State& state, F logits) {
  const int side = int(state.range(0));
  const auto p = init_mlp({30, 196, 160, 16}, 0);
  const RowMatrix x = pixel_matrix(features(side, side, 30));
  for (auto _ : state) benchmark::DoNotOptimize(logits(p, x));
  state.SetItemsProcessed(state.iterations() * x.rows());
}

template <class F>
void mlp_backward(benchmark::State& state, F backward) {
  const int side = int(state.range(0));
  const auto p = init_mlp({30, 196, 160, 16}, 0);
  const RowMatrix x = pixel_matrix(features(side, side, 30));
  const RowMatrix d = RowMatrix::Random(x.rows(), 16);
  for (auto _ : state) benchmark::DoNotOptimize(backward(p, x, d));
  state.SetItemsProcessed(state.iterations() * x.rows());
}

template <class F>
void slic_assign(benchmark::State& state, F assign) {
  const int side = int(state.range(0));
  Image img(side, side);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : img.data) v = u(rng);
  const double step = side / 20.0;
  std::vector<kernels::SlicCenter> centers;
  for (double r = step / 2; r < side; r += step)
    for (double c = step / 2; c < side; c += step) centers.push_back({r, c, u(rng)});
  std::vector<std::uint32_t> labels(img.data.size());
  for (auto _ : state) {
    assign(img, centers, step, 10.0, labels);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(img.data.size()));
}

template <class F>
void graph_rows(benchmark::State& state, F rows) {
  const int n = int(state.range(0));
  const auto f = pixel_matrix(features(1, n, 32));
  RowMatrix feat(n, 32);
  feat.leftCols(30) = f.leftCols(30);
  for (int k = 0; k < n; ++k) feat(k, 30) = double(k) / n, feat(k, 31) = double(k % 37) / 37.0;
  std::vector<std::vector<std::uint32_t>> nb(n);
  for (int k = 0; k + 1 < n; ++k) nb[k].push_back(std::uint32_t(k + 1)), nb[k + 1].push_back(std::uint32_t(k));
  GraphConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(rows(feat, 30, nb, cfg));
  state.SetItemsProcessed(state.iterations() * n);
}

template <class F>
void pca_project(benchmark::State& state, F project) {
  const int side = int(state.range(0));
  const auto c = cube(side, side, 200);
  const auto model = fit_pca(c, {0.999, false});
  for (auto _ : state) benchmark::DoNotOptimize(project(c, model.mean, model.scale, model.components));
  state.SetItemsProcessed(state.iterations() * std::int64_t(c.pixels()));
}

}  // namespace

BENCHMARK_CAPTURE(mlp_forward, ref, kernels::ref::mlp_logits)->Arg(64)->Arg(145);
BENCHMARK_CAPTURE(mlp_forward, omp, kernels::omp::mlp_logits)->Arg(64)->Arg(145);
BENCHMARK_CAPTURE(mlp_backward, ref, kernels::ref::mlp_backward)->Arg(64);
BENCHMARK_CAPTURE(mlp_backward, omp, kernels::omp::mlp_backward)->Arg(64);
BENCHMARK_CAPTURE(slic_assign, ref, kernels::ref::slic_assign)->Arg(145)->Arg(512);
BENCHMARK_CAPTURE(slic_assign, omp, kernels::omp::slic_assign)->Arg(145)->Arg(512);
BENCHMARK_CAPTURE(graph_rows, ref, kernels::ref::graph_rows)->Arg(1200)->Arg(5000);
BENCHMARK_CAPTURE(graph_rows, omp, kernels::omp::graph_rows)->Arg(1200)->Arg(5000);
BENCHMARK_CAPTURE(pca_project, ref, kernels::ref::pca_project)->Arg(145);
BENCHMARK_CAPTURE(pca_project, omp, kernels::omp::pca_project)->Arg(145);

BENCHMARK_MAIN();
