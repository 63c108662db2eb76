#include "grnn/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace grnn {

namespace {
int g_default_threads = 0;
}

void set_threads(int n) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
}

int max_threads() { return omp_get_max_threads(); }

BlockPlan plan_blocks(std::size_t rows, std::size_t min_block, std::size_t max_blocks) {
  BlockPlan plan;
  plan.rows = rows;
  if (rows == 0) return plan;
  min_block = std::max<std::size_t>(min_block, 1);
  max_blocks = std::max<std::size_t>(max_blocks, 1);
  plan.block = std::max(min_block, (rows + max_blocks - 1) / max_blocks);
  plan.count = (rows + plan.block - 1) / plan.block;
  return plan;
}

}  // namespace grnn
