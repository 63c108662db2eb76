#include "grnn/train.hpp"

#include <cstdio>

#include "grnn/io.hpp"

namespace grnn {

TrainResult train(const RowMatrix& pixels, const Segmentation& seg, const SuperpixelGraph& graph,
                  const LabelMap& train_labels, int num_classes, const TrainConfig& cfg,
                  Exec exec) {
  if (cfg.n_iter < 0) throw Error("train: n_iter must be >= 0");
  const Objective objective(pixels, seg, graph, train_labels, num_classes, cfg.weights, cfg.options);
  TrainResult result;
  result.params = init_mlp({int(pixels.cols()), cfg.hidden1, cfg.hidden2, num_classes}, cfg.seed,
                           cfg.negative_slope);
  AdamState adam(result.params.theta.size(), cfg.adam);
  std::vector<double> gradient;
  result.history.reserve(cfg.n_iter);
  for (int it = 0; it < cfg.n_iter; ++it) {
    result.history.push_back(objective.loss_and_gradient(result.params, gradient, exec));
    adam_step(adam, result.params.theta, gradient);
  }
  return result;
}

void save_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path) {
  std::string out = "iteration,total,pixel,superpixel,graph,variance,entropy\n";
  char buf[256];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, h.total,
                  h.pixel, h.superpixel, h.graph, h.variance, h.entropy);
    out += buf;
  }
  io::write_text(path, out);
}

}  // namespace grnn
