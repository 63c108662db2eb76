#pragma once

#include <filesystem>

#include "grnn/core.hpp"
#include "grnn/parallel.hpp"

namespace grnn {

struct PcaConfig {
  double variance_target = 0.999;
  bool standardize = false;  // divide each band by its standard deviation before fitting
};

struct PcaModel {
  Eigen::VectorXd mean;                // B
  Eigen::VectorXd scale;               // B; all ones unless standardized
  RowMatrix components;                // b x B, orthonormal rows
  Eigen::VectorXd explained_variance;  // b, non-increasing
  double total_variance = 0.0;
  bool degenerate = false;             // zero covariance; single zero-variance component kept

  int input_bands() const { return int(mean.size()); }
  int output_bands() const { return int(components.rows()); }
};

/// Fits on all pixels of the cube. Keeps the smallest number of components
/// whose cumulative explained variance reaches `variance_target`.
PcaModel fit_pca(const HsiCube& cube, const PcaConfig& cfg = {});

/// Projects every pixel: components * ((x - mean) / scale).
FeatureCube apply_pca(const PcaModel& model, const HsiCube& cube, Exec exec = Exec::Parallel);

/// Maps reduced pixels back to band space.
FeatureCube inverse_pca(const PcaModel& model, const FeatureCube& reduced);

/// Component 0 min-max scaled to [0,1]; a constant component maps to 0.5.
Image first_component_image(const FeatureCube& reduced);

void save_pca(const PcaModel& model, const std::filesystem::path& header_path);
PcaModel load_pca(const std::filesystem::path& header_path);

}  // namespace grnn
