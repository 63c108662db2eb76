#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/SparseCore>

#include "grnn/core.hpp"
#include "grnn/parallel.hpp"

namespace grnn {

struct GraphConfig {
  double h = 15.0;       // kernel bandwidth
  double beta = 0.9;     // spectral vs spatial trade-off
  double sigma_s = 2.0;  // spectral scale
  double sigma_l = 1.0;  // spatial scale
  int connectivity = 8;  // pixel connectivity defining superpixel adjacency (4 or 8)
  int n_s = 20;          // entries kept per row before symmetrization

  void validate() const;
};

struct GraphEdge {
  std::uint32_t node = 0;
  double weight = 0.0;
};

/// Superpixel graph: node features, symmetric non-negative weights with zero
/// diagonal, and strictly positive degrees.
struct SuperpixelGraph {
  int n = 0;
  int spectral_dims = 0;
  RowMatrix features;                          // n x (spectral_dims + 2); may be empty when loaded
  std::vector<std::vector<GraphEdge>> edges;   // per node, sorted by neighbor index
  std::vector<double> degrees;

  double weight(int k, int l) const;
  std::size_t nonzeros() const;
  /// W as a sparse matrix.
  Eigen::SparseMatrix<double> adjacency() const;
};

/// Row k = (mean spectrum over S_k, mean row index / H, mean col index / W).
RowMatrix extract_features(const FeatureCube& cube, const Segmentation& seg);

/// Superpixels sharing a 4- or 8-connected pixel boundary, sorted, without self.
std::vector<std::vector<std::uint32_t>> superpixel_neighbors(const Segmentation& seg,
                                                             int connectivity);

/// Gaussian similarity of two feature rows:
///   exp(-(beta * |a_s - b_s|^2 / sigma_s^2 + (1 - beta) * |a_p - b_p|^2 / sigma_l^2) / h)
/// where the s part is the first `spectral_dims` entries and the p part the remaining two.
double pair_weight(const double* a, const double* b, int spectral_dims, const GraphConfig& cfg);

/// Top-n_s sparsified, max-symmetrized similarity graph. Row k considers the
/// superpixels adjacent to k plus its n_s spectrally nearest nodes; a node left
/// without edges is linked to its most similar node.
SuperpixelGraph build_adjacency(const RowMatrix& features, int spectral_dims,
                                const std::vector<std::vector<std::uint32_t>>& neighbors,
                                const GraphConfig& cfg, Exec exec = Exec::Parallel);

/// Convenience overload computing features and neighbors from the cube.
SuperpixelGraph build_graph(const FeatureCube& cube, const Segmentation& seg,
                            const GraphConfig& cfg, Exec exec = Exec::Parallel);

/// Symmetric normalization D^{-1/2} W D^{-1/2}.
Eigen::SparseMatrix<double> normalized_adjacency(const SuperpixelGraph& graph);

/// `k,l,w` lines, one per stored (directed) entry, weights printed round-trip exact.
void save_graph(const SuperpixelGraph& graph, const std::filesystem::path& path);
/// Reads a graph written by save_graph; features are left empty.
SuperpixelGraph load_graph(const std::filesystem::path& path);

}  // namespace grnn
