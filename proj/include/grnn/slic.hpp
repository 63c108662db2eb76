#pragma once

#include <cstdint>
#include <vector>

#include "grnn/core.hpp"
#include "grnn/parallel.hpp"

namespace grnn {

struct SlicConfig {
  int n_superpixels = 1200;
  double compactness = 0.1;        // weight of normalized spatial distance vs intensity
  int max_iters = 10;
  double min_size_fraction = 0.25;  // fragments below this fraction of the mean size are merged

  void validate(int height, int width) const;
};

/// Single-channel SLIC on an image with values in [0,1]. The result is a total
/// partition into 4-connected superpixels whose count is at most 20% above
/// the target; results are independent of `exec`.
Segmentation slic_segment(const Image& image, const SlicConfig& cfg, Exec exec = Exec::Parallel);

/// Relabels 4-connected components, merges components smaller than
/// min_size_fraction * H*W / n_target into their largest adjacent component,
/// and compacts ids in raster order of first appearance.
Segmentation enforce_connectivity(const std::vector<std::uint32_t>& raw, int height, int width,
                                  int n_target, double min_size_fraction);

}  // namespace grnn
