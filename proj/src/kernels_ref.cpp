#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "grnn/kernels.hpp"

namespace grnn::kernels::ref {

namespace {

struct PixelActivations {
  std::vector<double> z1, a1, z2, a2, z3;
};

void forward_pixel(const MlpParams& p, const MlpLayout& L, const double* x, PixelActivations& act) {
  const auto& s = p.shape;
  const double* t = p.theta.data();
  act.z1.assign(s.hidden1, 0.0);
  act.a1.resize(s.hidden1);
  for (int i = 0; i < s.hidden1; ++i) {
    double acc = t[L.b1 + i];
    for (int j = 0; j < s.inputs; ++j) acc += t[L.w1 + std::size_t(i) * s.inputs + j] * x[j];
    act.z1[i] = acc;
    act.a1[i] = leaky_relu(acc, p.slope);
  }
  act.z2.assign(s.hidden2, 0.0);
  act.a2.resize(s.hidden2);
  for (int i = 0; i < s.hidden2; ++i) {
    double acc = t[L.b2 + i];
    for (int j = 0; j < s.hidden1; ++j) acc += t[L.w2 + std::size_t(i) * s.hidden1 + j] * act.a1[j];
    act.z2[i] = acc;
    act.a2[i] = leaky_relu(acc, p.slope);
  }
  act.z3.assign(s.classes, 0.0);
  for (int i = 0; i < s.classes; ++i) {
    double acc = t[L.b3 + i];
    for (int j = 0; j < s.hidden2; ++j) acc += t[L.w3 + std::size_t(i) * s.hidden2 + j] * act.a2[j];
    act.z3[i] = acc;
  }
}

double squared_distance(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

RowMatrix mlp_logits(const MlpParams& params, const RowMatrix& x) {
  const MlpLayout L(params.shape);
  RowMatrix out(x.rows(), params.shape.classes);
  PixelActivations act;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    forward_pixel(params, L, x.row(j).data(), act);
    for (int q = 0; q < params.shape.classes; ++q) out(j, q) = act.z3[q];
  }
  return out;
}

std::vector<double> mlp_backward(const MlpParams& params, const RowMatrix& x,
                                 const RowMatrix& dlogits) {
  const auto& s = params.shape;
  const MlpLayout L(s);
  const double* t = params.theta.data();
  std::vector<double> grad(L.total, 0.0);
  PixelActivations act;
  std::vector<double> d2(s.hidden2), d1(s.hidden1);
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double* xj = x.row(j).data();
    forward_pixel(params, L, xj, act);
    const double* g3 = dlogits.row(j).data();
    std::fill(d2.begin(), d2.end(), 0.0);
    for (int i = 0; i < s.classes; ++i) {
      grad[L.b3 + i] += g3[i];
      for (int k = 0; k < s.hidden2; ++k) {
        grad[L.w3 + std::size_t(i) * s.hidden2 + k] += g3[i] * act.a2[k];
        d2[k] += g3[i] * t[L.w3 + std::size_t(i) * s.hidden2 + k];
      }
    }
    for (int k = 0; k < s.hidden2; ++k) d2[k] *= act.z2[k] > 0.0 ? 1.0 : params.slope;
    std::fill(d1.begin(), d1.end(), 0.0);
    for (int i = 0; i < s.hidden2; ++i) {
      grad[L.b2 + i] += d2[i];
      for (int k = 0; k < s.hidden1; ++k) {
        grad[L.w2 + std::size_t(i) * s.hidden1 + k] += d2[i] * act.a1[k];
        d1[k] += d2[i] * t[L.w2 + std::size_t(i) * s.hidden1 + k];
      }
    }
    for (int k = 0; k < s.hidden1; ++k) d1[k] *= act.z1[k] > 0.0 ? 1.0 : params.slope;
    for (int i = 0; i < s.hidden1; ++i) {
      grad[L.b1 + i] += d1[i];
      for (int k = 0; k < s.inputs; ++k) grad[L.w1 + std::size_t(i) * s.inputs + k] += d1[i] * xj[k];
    }
  }
  return grad;
}

void slic_assign(const Image& image, std::span<const SlicCenter> centers, double step,
                 double compactness, std::vector<std::uint32_t>& labels) {
  std::vector<double> best(labels.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto& c = centers[k];
    const int r0 = std::max(0, int(std::ceil(c.row - step)));
    const int r1 = std::min(image.height - 1, int(std::floor(c.row + step)));
    const int c0 = std::max(0, int(std::ceil(c.col - step)));
    const int c1 = std::min(image.width - 1, int(std::floor(c.col + step)));
    for (int r = r0; r <= r1; ++r) {
      for (int col = c0; col <= c1; ++col) {
        const std::size_t p = std::size_t(r) * image.width + col;
        const double d = slic_distance2(r, col, image.data[p], c, step, compactness);
        if (d < best[p]) {
          best[p] = d;
          labels[p] = std::uint32_t(k);
        }
      }
    }
  }
}

GraphRows graph_rows(const RowMatrix& features, int spectral_dims,
                     const std::vector<std::vector<std::uint32_t>>& neighbors,
                     const GraphConfig& cfg) {
  const int n = int(features.rows());
  RowMatrix spec(n, n), weight(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      spec(k, l) = squared_distance(features.row(k).data(), features.row(l).data(), spectral_dims);
      weight(k, l) = pair_weight(features.row(k).data(), features.row(l).data(), spectral_dims, cfg);
    }
  }
  GraphRows rows(n);
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return spec(k, a) < spec(k, b); });
    std::vector<char> candidate(n, 0);
    int taken = 0;
    for (int l : order) {
      if (taken == cfg.n_s) break;
      if (l == k) continue;
      candidate[l] = 1;
      ++taken;
    }
    for (auto l : neighbors[k]) candidate[l] = 1;

    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return weight(k, a) > weight(k, b); });
    taken = 0;
    for (int l : order) {
      if (taken == cfg.n_s) break;
      if (!candidate[l] || weight(k, l) <= 0.0) continue;
      rows[k].push_back({std::uint32_t(l), weight(k, l)});
      ++taken;
    }
    std::sort(rows[k].begin(), rows[k].end(),
              [](const GraphEdge& a, const GraphEdge& b) { return a.node < b.node; });
  }
  return rows;
}

FeatureCube pca_project(const HsiCube& cube, const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& scale, const RowMatrix& components) {
  const int b = int(components.rows());
  FeatureCube out(cube.height, cube.width, b);
  std::vector<double> centered(cube.bands);
  for (std::size_t p = 0; p < cube.pixels(); ++p) {
    const float* x = cube.pixel(p);
    for (int j = 0; j < cube.bands; ++j) centered[j] = (double(x[j]) - mean[j]) / scale[j];
    double* y = out.pixel(p);
    for (int i = 0; i < b; ++i) {
      double acc = 0.0;
      for (int j = 0; j < cube.bands; ++j) acc += components(i, j) * centered[j];
      y[i] = acc;
    }
  }
  return out;
}

}  // namespace grnn::kernels::ref
