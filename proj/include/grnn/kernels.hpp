#pragma once

// Hot loops in two flavours. `ref` is the plain serial formulation kept as a
// test oracle; `omp` is the OpenMP version used by the pipeline. Each pair is
// checked against the other in tests/test_kernels.cpp and timed in bench/.

#include <cstdint>
#include <span>
#include <vector>

#include "grnn/core.hpp"
#include "grnn/graph.hpp"
#include "grnn/mlp.hpp"

namespace grnn::kernels {

struct SlicCenter {
  double row = 0.0;
  double col = 0.0;
  double intensity = 0.0;
};

/// Per-row kept entries of the sparsified similarity graph (before symmetrization).
using GraphRows = std::vector<std::vector<GraphEdge>>;

namespace ref {

/// x (n x inputs) -> logits (n x classes), one pixel at a time.
RowMatrix mlp_logits(const MlpParams& params, const RowMatrix& x);

/// Gradient of sum_j <dlogits_j, z_j(theta)> with respect to theta.
std::vector<double> mlp_backward(const MlpParams& params, const RowMatrix& x,
                                 const RowMatrix& dlogits);

/// Classic center-major SLIC assignment: each center scans its 2S x 2S window
/// and claims pixels it is strictly closer to. Pixels outside every window
/// keep their label.
void slic_assign(const Image& image, std::span<const SlicCenter> centers, double step,
                 double compactness, std::vector<std::uint32_t>& labels);

/// Dense pairwise weights, then per-row candidate selection and top-n_s.
GraphRows graph_rows(const RowMatrix& features, int spectral_dims,
                     const std::vector<std::vector<std::uint32_t>>& neighbors,
                     const GraphConfig& cfg);

/// components (b x B) * (pixel - mean) / scale for every pixel.
FeatureCube pca_project(const HsiCube& cube, const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& scale, const RowMatrix& components);

}  // namespace ref

namespace omp {

RowMatrix mlp_logits(const MlpParams& params, const RowMatrix& x);
std::vector<double> mlp_backward(const MlpParams& params, const RowMatrix& x,
                                 const RowMatrix& dlogits);

/// Center-major assignment split into row strips, one strip per task; same result as ref.
void slic_assign(const Image& image, std::span<const SlicCenter> centers, double step,
                 double compactness, std::vector<std::uint32_t>& labels);

/// Row-parallel candidate selection without materializing N x N.
GraphRows graph_rows(const RowMatrix& features, int spectral_dims,
                     const std::vector<std::vector<std::uint32_t>>& neighbors,
                     const GraphConfig& cfg);

FeatureCube pca_project(const HsiCube& cube, const Eigen::VectorXd& mean,
                        const Eigen::VectorXd& scale, const RowMatrix& components);

}  // namespace omp

/// SLIC distance between a pixel and a center, squared.
inline double slic_distance2(double row, double col, double intensity, const SlicCenter& c,
                             double step, double compactness) {
  const double di = intensity - c.intensity;
  const double dr = row - c.row;
  const double dc = col - c.col;
  return di * di + (dr * dr + dc * dc) / (step * step) * (compactness * compactness);
}

}  // namespace grnn::kernels
