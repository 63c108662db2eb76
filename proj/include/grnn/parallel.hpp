#pragma once

#include <cstddef>

namespace grnn {

/// Selects the serial reference kernels or their OpenMP counterparts.
enum class Exec { Serial, Parallel };

/// Fixes the OpenMP worker count; n <= 0 restores the runtime default.
void set_threads(int n);
int max_threads();

/// Row ranges for blocked reductions. Block boundaries depend only on the
/// problem size, so reductions summed in block order give the same bits for
/// every thread count.
struct BlockPlan {
  std::size_t rows = 0;
  std::size_t block = 1;
  std::size_t count = 0;

  std::size_t begin(std::size_t i) const { return i * block; }
  std::size_t end(std::size_t i) const { return i + 1 == count ? rows : (i + 1) * block; }
};

/// Splits `rows` into at most `max_blocks` blocks of at least `min_block` rows.
BlockPlan plan_blocks(std::size_t rows, std::size_t min_block, std::size_t max_blocks);

}  // namespace grnn
