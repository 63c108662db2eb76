#pragma once

#include <filesystem>

#include <Eigen/SparseCore>

#include "grnn/core.hpp"
#include "grnn/graph.hpp"
#include "grnn/mlp.hpp"

namespace grnn {

/// Pixels whose top predicted probability reaches `tau`, labeled with the argmax class.
LabelMap confident_set(const MlpParams& params, const FeatureCube& reduced, double tau,
                       Exec exec = Exec::Parallel);

/// Same, from precomputed probabilities (rows in raster order).
LabelMap confident_set(const RowMatrix& probabilities, int height, int width, double tau);

/// Union of both label sets; where a pixel appears in both, `base` wins.
LabelMap merge_labels(const LabelMap& base, const LabelMap& confident);

enum class Solver { Auto, Direct, FixedPoint };

/// Largest N solved with a dense factorization under Solver::Auto.
inline constexpr int kDirectSolveLimit = 2000;

/// Solves (I - alpha * S) F = T with S = D^{-1/2} W D^{-1/2}.
RowMatrix propagate(const SuperpixelGraph& graph, const RowMatrix& t, double alpha,
                    Solver solver = Solver::Auto);

RowMatrix propagate_direct(const Eigen::SparseMatrix<double>& s, const RowMatrix& t, double alpha);

/// Iterates F <- alpha * S * F + T until max |(I - alpha S) F - T| < tolerance.
RowMatrix propagate_fixed_point(const Eigen::SparseMatrix<double>& s, const RowMatrix& t,
                                double alpha, double tolerance = 1e-12, int max_iters = 100000);

/// Broadcasts each superpixel's argmax class to its pixels. Rows with no
/// positive entry fall back to class 1 and are flagged Provenance::Fallback.
ClassificationMap final_labels(const RowMatrix& t_star, const Segmentation& seg);

/// Per-pixel argmax of probabilities (no smoothing).
ClassificationMap pixel_labels(const RowMatrix& probabilities, int height, int width);

void save_matrix_csv(const RowMatrix& m, const std::filesystem::path& path);

}  // namespace grnn
