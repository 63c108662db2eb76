#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "grnn/kernels.hpp"

namespace grnn::kernels::omp {

namespace {

using ConstMap = Eigen::Map<const RowMatrix>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;

constexpr std::size_t kRowBlock = 256;
// Upper bound on doubles held by per-block gradient buffers.
constexpr std::size_t kGradientBudget = std::size_t(1) << 23;

struct Views {
  ConstMap w1, w2, w3;
  ConstVec b1, b2, b3;

  Views(const MlpParams& p, const MlpLayout& L)
      : w1(p.theta.data() + L.w1, p.shape.hidden1, p.shape.inputs),
        w2(p.theta.data() + L.w2, p.shape.hidden2, p.shape.hidden1),
        w3(p.theta.data() + L.w3, p.shape.classes, p.shape.hidden2),
        b1(p.theta.data() + L.b1, p.shape.hidden1),
        b2(p.theta.data() + L.b2, p.shape.hidden2),
        b3(p.theta.data() + L.b3, p.shape.classes) {}
};

RowMatrix leaky(const RowMatrix& z, double slope) {
  return z.unaryExpr([slope](double u) { return leaky_relu(u, slope); });
}

RowMatrix leaky_grad(const RowMatrix& z, double slope) {
  return z.unaryExpr([slope](double u) { return u > 0.0 ? 1.0 : slope; });
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
  const Views v(params, L);
  RowMatrix out(x.rows(), params.shape.classes);
  const auto plan = plan_blocks(std::size_t(x.rows()), kRowBlock, std::numeric_limits<std::size_t>::max());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(plan.count); ++i) {
    const auto r0 = Eigen::Index(plan.begin(i));
    const auto rows = Eigen::Index(plan.end(i)) - r0;
    const auto xb = x.middleRows(r0, rows);
    RowMatrix a1 = leaky((xb * v.w1.transpose()).rowwise() + v.b1.transpose(), params.slope);
    RowMatrix a2 = leaky((a1 * v.w2.transpose()).rowwise() + v.b2.transpose(), params.slope);
    out.middleRows(r0, rows) = (a2 * v.w3.transpose()).rowwise() + v.b3.transpose();
  }
  return out;
}

std::vector<double> mlp_backward(const MlpParams& params, const RowMatrix& x,
                                 const RowMatrix& dlogits) {
  const auto& s = params.shape;
  const MlpLayout L(s);
  const Views v(params, L);
  const auto plan = plan_blocks(std::size_t(x.rows()), kRowBlock,
                                std::clamp<std::size_t>(kGradientBudget / L.total, 1, 64));
  std::vector<std::vector<double>> partial(plan.count, std::vector<double>(L.total, 0.0));

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(plan.count); ++i) {
    const auto r0 = Eigen::Index(plan.begin(i));
    const auto rows = Eigen::Index(plan.end(i)) - r0;
    const auto xb = x.middleRows(r0, rows);
    const RowMatrix z1 = (xb * v.w1.transpose()).rowwise() + v.b1.transpose();
    const RowMatrix a1 = leaky(z1, params.slope);
    const RowMatrix z2 = (a1 * v.w2.transpose()).rowwise() + v.b2.transpose();
    const RowMatrix a2 = leaky(z2, params.slope);
    const auto g3 = dlogits.middleRows(r0, rows);

    double* g = partial[i].data();
    Eigen::Map<RowMatrix>(g + L.w3, s.classes, s.hidden2).noalias() = g3.transpose() * a2;
    Eigen::Map<Eigen::VectorXd>(g + L.b3, s.classes) = g3.colwise().sum().transpose();
    const RowMatrix d2 = (g3 * v.w3).cwiseProduct(leaky_grad(z2, params.slope));
    Eigen::Map<RowMatrix>(g + L.w2, s.hidden2, s.hidden1).noalias() = d2.transpose() * a1;
    Eigen::Map<Eigen::VectorXd>(g + L.b2, s.hidden2) = d2.colwise().sum().transpose();
    const RowMatrix d1 = (d2 * v.w2).cwiseProduct(leaky_grad(z1, params.slope));
    Eigen::Map<RowMatrix>(g + L.w1, s.hidden1, s.inputs).noalias() = d1.transpose() * xb;
    Eigen::Map<Eigen::VectorXd>(g + L.b1, s.hidden1) = d1.colwise().sum().transpose();
  }

  std::vector<double> grad(L.total, 0.0);
  for (const auto& part : partial) {
    for (std::size_t t = 0; t < grad.size(); ++t) grad[t] += part[t];
  }
  return grad;
}

void slic_assign(const Image& image, std::span<const SlicCenter> centers, double step,
                 double compactness, std::vector<std::uint32_t>& labels) {
  // Row strips are disjoint, and each pixel still sees centers in index order,
  // so the result matches the center-major reference exactly.
  std::vector<double> best(labels.size(), std::numeric_limits<double>::infinity());
  const int strip = std::max(1, int(std::ceil(step)));
  const int n_strips = (image.height + strip - 1) / strip;
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < n_strips; ++s) {
    const int lo = s * strip, hi = std::min(image.height - 1, lo + strip - 1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& c = centers[k];
      const int r0 = std::max(lo, int(std::ceil(c.row - step)));
      const int r1 = std::min(hi, int(std::floor(c.row + step)));
      if (r0 > r1) continue;
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
}

GraphRows graph_rows(const RowMatrix& features, int spectral_dims,
                     const std::vector<std::vector<std::uint32_t>>& neighbors,
                     const GraphConfig& cfg) {
  const int n = int(features.rows());
  GraphRows rows(n);
#pragma omp parallel
  {
    std::vector<std::pair<double, int>> by_distance;
    std::vector<std::pair<double, int>> scored;
    std::vector<int> candidates;
#pragma omp for schedule(dynamic, 16)
    for (int k = 0; k < n; ++k) {
      const double* fk = features.row(k).data();
      by_distance.clear();
      for (int l = 0; l < n; ++l) {
        if (l == k) continue;
        by_distance.emplace_back(squared_distance(fk, features.row(l).data(), spectral_dims), l);
      }
      const auto nearest = std::min<std::size_t>(std::size_t(cfg.n_s), by_distance.size());
      std::nth_element(by_distance.begin(), by_distance.begin() + nearest, by_distance.end());
      candidates.clear();
      for (std::size_t i = 0; i < nearest; ++i) candidates.push_back(by_distance[i].second);
      candidates.insert(candidates.end(), neighbors[k].begin(), neighbors[k].end());
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      scored.clear();
      for (int l : candidates) {
        const double w = pair_weight(fk, features.row(l).data(), spectral_dims, cfg);
        if (w > 0.0) scored.emplace_back(-w, l);
      }
      const auto keep = std::min<std::size_t>(std::size_t(cfg.n_s), scored.size());
      std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());
      auto& row = rows[k];
      for (std::size_t i = 0; i < keep; ++i) {
        row.push_back({std::uint32_t(scored[i].second), -scored[i].first});
      }
      std::sort(row.begin(), row.end(),
                [](const GraphEdge& a, const GraphEdge& b) { return a.node < b.node; });
    }
  }
  return rows;
}

FeatureCube pca_project(const HsiCube& cube, const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& scale, const RowMatrix& components) {
  const int b = int(components.rows());
  FeatureCube out(cube.height, cube.width, b);
  const auto plan = plan_blocks(cube.pixels(), 1024, std::numeric_limits<std::size_t>::max());
  const Eigen::RowVectorXd inv_scale = scale.cwiseInverse().transpose();
  const Eigen::MatrixXd projection = components.transpose();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(plan.count); ++i) {
    const auto p0 = plan.begin(i);
    const auto rows = Eigen::Index(plan.end(i) - p0);
    Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xb(
        cube.pixel(p0), rows, cube.bands);
    RowMatrix centered = (xb.cast<double>().rowwise() - mean.transpose()).array().rowwise() *
                         inv_scale.array();
    Eigen::Map<RowMatrix>(out.pixel(p0), rows, b).noalias() = centered * projection;
  }
  return out;
}

}  // namespace grnn::kernels::omp
