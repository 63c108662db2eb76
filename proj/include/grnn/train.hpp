#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "grnn/objective.hpp"

namespace grnn {

struct TrainConfig {
  int hidden1 = 196;
  int hidden2 = 160;
  double negative_slope = 0.1;
  LossWeights weights;
  ObjectiveOptions options;
  AdamConfig adam;
  int n_iter = 500;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpParams params;
  std::vector<LossBreakdown> history;  // loss before each update
};

/// Full-batch Adam on the graph-regularized objective.
TrainResult train(const RowMatrix& pixels, const Segmentation& seg, const SuperpixelGraph& graph,
                  const LabelMap& train_labels, int num_classes, const TrainConfig& cfg,
                  Exec exec = Exec::Parallel);

void save_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path);

}  // namespace grnn
