#pragma once

#include <string>
#include <vector>

#include "grnn/core.hpp"
#include "grnn/graph.hpp"
#include "grnn/labels.hpp"
#include "grnn/mlp.hpp"
#include "grnn/parallel.hpp"

namespace grnn {

/// Multipliers of the regularizers; the pixel cross-entropy has weight 1.
struct LossWeights {
  double spc = 0.0;       // superpixel soft-label fit
  double graph = 0.0;     // normalized graph energy
  double variance = 0.0;  // intra-superpixel prediction variance
  double entropy = 0.0;   // negative entropy of the mean superpixel prediction

  void validate() const;
};

struct ObjectiveOptions {
  /// Sum the graph energy over every ordered node pair without edge weights
  /// instead of over edges weighted by W.
  bool graph_term_unweighted = false;
};

/// Loss value split into its five terms, each already multiplied by its weight.
struct LossBreakdown {
  double pixel = 0.0;
  double superpixel = 0.0;
  double graph = 0.0;
  double variance = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

/// Mean of the pixel probability rows within each superpixel (N x c).
RowMatrix superpixel_prediction(const RowMatrix& probabilities, const Segmentation& seg);

/// Graph-regularized training loss over all pixels of an image.
///
///   sum_{j in L} CE(Y_j, p_j)
///   + spc      * sum_{k labeled} |t_k - phi_k|^2
///   + graph    * sum_{k,l} W_kl |phi_k / sqrt(d_k) - phi_l / sqrt(d_l)|^2
///   + variance * sum_k (1/|S_k|) sum_{j in S_k} |p_j - phi_k|^2
///   - entropy  * H((1/N) sum_k phi_k)
///
/// where p_j is the softmax output at pixel j, phi_k the mean of p_j over S_k
/// and t_k the soft label of S_k. The graph sum runs over ordered pairs, so
/// each undirected edge contributes twice.
///
/// Holds references to `pixels`, `seg` and `graph`; they must outlive it.
class Objective {
 public:
  Objective(const RowMatrix& pixels, const Segmentation& seg, const SuperpixelGraph& graph,
            const LabelMap& train, int num_classes, LossWeights weights,
            ObjectiveOptions options = {});

  LossBreakdown loss(const MlpParams& params, Exec exec = Exec::Parallel) const;

  /// Loss and its exact gradient with respect to params.theta.
  LossBreakdown loss_and_gradient(const MlpParams& params, std::vector<double>& gradient,
                                  Exec exec = Exec::Parallel) const;

  const SuperpixelLabels& superpixel_labels() const { return sp_labels_; }
  int num_classes() const { return num_classes_; }

 private:
  LossBreakdown evaluate(const MlpParams& params, std::vector<double>* gradient, Exec exec) const;

  const RowMatrix& pixels_;
  const Segmentation& seg_;
  const SuperpixelGraph& graph_;
  int num_classes_;
  LossWeights weights_;
  ObjectiveOptions options_;
  SuperpixelLabels sp_labels_;
  std::vector<std::size_t> labeled_pixels_;
  std::vector<int> labeled_class_;  // 0-based
  std::vector<std::size_t> sizes_;
  std::vector<double> inv_sqrt_degree_;
};

}  // namespace grnn
