#pragma once

// Small random objective instances and a central-difference gradient check,
// shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "grnn/graph.hpp"
#include "grnn/objective.hpp"

namespace testing {

struct TinyInstance {
  grnn::RowMatrix pixels;
  grnn::Segmentation seg;
  grnn::SuperpixelGraph graph;
  grnn::LabelMap train;
  grnn::MlpParams params;
  grnn::LossWeights weights;
  int classes = 0;
};

// Rows of the h x w image are split into `n_sp` horizontal bands (one superpixel each).
inline std::unique_ptr<TinyInstance> tiny_instance(std::uint64_t seed, int b, int h1, int h2, int c,
                                                   int n_sp, int height, int width,
                                                   bool random_weights = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto t = std::make_unique<TinyInstance>();
  t->classes = c;
  const int n = height * width;
  grnn::FeatureCube cube(height, width, b);
  for (auto& v : cube.data) v = g(rng);
  t->pixels = grnn::pixel_matrix(cube);

  t->seg.height = height;
  t->seg.width = width;
  t->seg.count = n_sp;
  for (int r = 0; r < height; ++r)
    for (int col = 0; col < width; ++col) t->seg.assignment.push_back(std::uint32_t(r * n_sp / height));

  grnn::GraphConfig gc;
  gc.h = 1.0;
  gc.sigma_s = 2.0;
  gc.sigma_l = 1.0;
  gc.n_s = 4;
  t->graph = grnn::build_graph(cube, t->seg, gc, grnn::Exec::Serial);

  t->train.height = height;
  t->train.width = width;
  t->train.num_classes = c;
  for (int p = 0; p < n; ++p)
    if (p % 2 == 0 || u(rng) < 0.3) t->train.entries.push_back({p / width, p % width, 1 + int(rng() % c)});

  t->params = grnn::init_mlp({b, h1, h2, c}, seed + 1);
  for (auto& v : t->params.theta) v += 0.1 * g(rng);  // non-zero biases
  if (random_weights) t->weights = {u(rng) * 2, u(rng) * 2, u(rng) * 2, u(rng) * 2};
  return t;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor) over every coordinate.
inline GradCheck check_gradient(const grnn::Objective& obj, grnn::MlpParams params, double step = 1e-5,
                                double floor = 1e-6,
                                grnn::Exec exec = grnn::Exec::Serial) {
  std::vector<double> grad;
  obj.loss_and_gradient(params, grad, exec);
  GradCheck r;
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    const double keep = params.theta[i];
    params.theta[i] = keep + step;
    const double up = obj.loss(params, exec).total;
    params.theta[i] = keep - step;
    const double down = obj.loss(params, exec).total;
    params.theta[i] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(grad[i]), std::abs(numeric), floor});
    r.max_rel_error = std::max(r.max_rel_error, std::abs(grad[i] - numeric) / denom);
    ++r.coordinates;
  }
  return r;
}

}  // namespace testing
