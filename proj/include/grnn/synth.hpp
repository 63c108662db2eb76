#pragma once

#include <cstdint>
#include <vector>

#include "grnn/core.hpp"

namespace grnn {

/// Crown-structured synthetic scene: Voronoi cells ("crowns") each carrying
/// one class signature plus i.i.d. Gaussian noise.
struct SynthConfig {
  int height = 64;
  int width = 64;
  int bands = 32;
  int n_classes = 8;
  int crowns_per_class = 4;
  double noise_sigma = 0.0;
  /// When > 0, overrides noise_sigma so that mean signal power / noise power matches.
  double snr_db = 15.0;
  double spectral_separation = 0.5;  // minimum pairwise L2 distance of class signatures
  double label_fraction = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthScene {
  HsiCube cube;
  LabelMap truth;   // every pixel
  LabelMap sparse;  // per-class random subset at label_fraction, at least one per class
  std::vector<std::vector<double>> signatures;
  std::vector<int> crown;  // Voronoi cell index per pixel, raster order
  double noise_sigma = 0.0;
};

SynthScene generate(const SynthConfig& cfg);

/// Nearest-signature classification of every pixel (noise-free ceiling check).
ClassificationMap nearest_signature_map(const HsiCube& cube,
                                        const std::vector<std::vector<double>>& signatures);

}  // namespace grnn
