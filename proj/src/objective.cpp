#include "grnn/objective.hpp"

#include <cmath>

#include "grnn/kernels.hpp"

namespace grnn {

void LossWeights::validate() const {
  if (!(spc >= 0.0 && graph >= 0.0 && variance >= 0.0 && entropy >= 0.0)) {
    throw Error("loss weights must be non-negative");
  }
}

RowMatrix superpixel_prediction(const RowMatrix& probabilities, const Segmentation& seg) {
  if (std::size_t(probabilities.rows()) != seg.pixels()) {
    throw Error("prediction rows do not match segmentation pixels");
  }
  RowMatrix phi = RowMatrix::Zero(seg.count, probabilities.cols());
  std::vector<double> count(seg.count, 0.0);
  for (std::size_t p = 0; p < seg.pixels(); ++p) {
    phi.row(seg.assignment[p]) += probabilities.row(Eigen::Index(p));
    count[seg.assignment[p]] += 1.0;
  }
  for (int k = 0; k < seg.count; ++k) phi.row(k) /= count[k];
  return phi;
}

Objective::Objective(const RowMatrix& pixels, const Segmentation& seg,
                     const SuperpixelGraph& graph, const LabelMap& train, int num_classes,
                     LossWeights weights, ObjectiveOptions options)
    : pixels_(pixels), seg_(seg), graph_(graph), num_classes_(num_classes), weights_(weights),
      options_(options) {
  weights_.validate();
  if (std::size_t(pixels.rows()) != seg.pixels()) {
    throw Error("objective: pixel matrix does not match segmentation");
  }
  if (graph.n != seg.count) throw Error("objective: graph size does not match segmentation");
  if (num_classes < 1) throw Error("objective: need at least one class");
  sp_labels_ = soft_labels(train, seg, num_classes);
  for (const auto& e : train.entries) {
    labeled_pixels_.push_back(std::size_t(e.row) * seg.width + e.col);
    labeled_class_.push_back(e.class_id - 1);
  }
  sizes_ = seg.sizes();
  inv_sqrt_degree_.resize(graph.n);
  for (int k = 0; k < graph.n; ++k) {
    if (!(graph.degrees[k] > 0.0)) {
      throw Error("objective: node " + std::to_string(k) + " has zero degree");
    }
    inv_sqrt_degree_[k] = 1.0 / std::sqrt(graph.degrees[k]);
  }
}

LossBreakdown Objective::loss(const MlpParams& params, Exec exec) const {
  return evaluate(params, nullptr, exec);
}

LossBreakdown Objective::loss_and_gradient(const MlpParams& params, std::vector<double>& gradient,
                                           Exec exec) const {
  return evaluate(params, &gradient, exec);
}

LossBreakdown Objective::evaluate(const MlpParams& params, std::vector<double>* gradient,
                                  Exec exec) const {
  if (params.shape.classes != num_classes_) throw Error("objective: class count mismatch");
  const int c = num_classes_;
  const int n_sp = seg_.count;
  const RowMatrix z = logits(params, pixels_, exec);
  const RowMatrix p = softmax_rows(z);
  const RowMatrix phi = superpixel_prediction(p, seg_);
  LossBreakdown out;

  // Pixel cross-entropy through log-sum-exp.
  for (std::size_t i = 0; i < labeled_pixels_.size(); ++i) {
    const auto j = Eigen::Index(labeled_pixels_[i]);
    const double m = z.row(j).maxCoeff();
    const double lse = m + std::log((z.row(j).array() - m).exp().sum());
    out.pixel += lse - z(j, labeled_class_[i]);
  }

  for (int k = 0; k < n_sp; ++k) {
    if (sp_labels_.labeled[k]) out.superpixel += (sp_labels_.soft.row(k) - phi.row(k)).squaredNorm();
  }
  out.superpixel *= weights_.spc;

  RowMatrix u = phi;
  for (int k = 0; k < n_sp; ++k) u.row(k) *= inv_sqrt_degree_[k];
  Eigen::RowVectorXd u_sum = Eigen::RowVectorXd::Zero(c);
  if (options_.graph_term_unweighted) {
    double sq = 0.0;
    for (int k = 0; k < n_sp; ++k) {
      sq += u.row(k).squaredNorm();
      u_sum += u.row(k);
    }
    out.graph = 2.0 * n_sp * sq - 2.0 * u_sum.squaredNorm();
  } else {
    for (int k = 0; k < n_sp; ++k) {
      for (const auto& e : graph_.edges[k]) {
        out.graph += e.weight * (u.row(k) - u.row(e.node)).squaredNorm();
      }
    }
  }
  out.graph *= weights_.graph;

  for (std::size_t j = 0; j < seg_.pixels(); ++j) {
    const auto k = seg_.assignment[j];
    out.variance += (p.row(Eigen::Index(j)) - phi.row(k)).squaredNorm() / double(sizes_[k]);
  }
  out.variance *= weights_.variance;

  const Eigen::RowVectorXd mean_phi = phi.colwise().sum() / double(n_sp);
  double entropy = 0.0;
  for (int q = 0; q < c; ++q) {
    if (mean_phi[q] > 0.0) entropy -= mean_phi[q] * std::log(mean_phi[q]);
  }
  out.entropy = -weights_.entropy * entropy;

  out.total = out.pixel + out.superpixel + out.graph + out.variance + out.entropy;
  const std::pair<const char*, double> terms[] = {{"pixel cross-entropy", out.pixel},
                                                  {"superpixel label", out.superpixel},
                                                  {"graph energy", out.graph},
                                                  {"intra-superpixel variance", out.variance},
                                                  {"entropy", out.entropy}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) throw NumericalError(std::string("loss: ") + name + " term is non-finite");
  }
  if (!gradient) return out;

  // d loss / d phi.
  RowMatrix g_phi = RowMatrix::Zero(n_sp, c);
  if (weights_.spc > 0.0) {
    for (int k = 0; k < n_sp; ++k) {
      if (sp_labels_.labeled[k]) g_phi.row(k) += 2.0 * weights_.spc * (phi.row(k) - sp_labels_.soft.row(k));
    }
  }
  if (weights_.graph > 0.0) {
    RowMatrix g_u = RowMatrix::Zero(n_sp, c);
    if (options_.graph_term_unweighted) {
      for (int k = 0; k < n_sp; ++k) g_u.row(k) = 4.0 * (n_sp * u.row(k) - u_sum);
    } else {
      for (int k = 0; k < n_sp; ++k) {
        for (const auto& e : graph_.edges[k]) g_u.row(k) += 4.0 * e.weight * (u.row(k) - u.row(e.node));
      }
    }
    for (int k = 0; k < n_sp; ++k) g_phi.row(k) += weights_.graph * inv_sqrt_degree_[k] * g_u.row(k);
  }
  if (weights_.entropy > 0.0) {
    Eigen::RowVectorXd g_mean(c);
    for (int q = 0; q < c; ++q) g_mean[q] = weights_.entropy * (std::log(mean_phi[q]) + 1.0);
    g_phi.rowwise() += g_mean / double(n_sp);
  }

  // d loss / d p, then through softmax to the logits.
  RowMatrix g_z(p.rows(), c);
  Eigen::RowVectorXd g_p(c);
  for (std::size_t j = 0; j < seg_.pixels(); ++j) {
    const auto k = seg_.assignment[j];
    const auto row = Eigen::Index(j);
    const double inv_size = 1.0 / double(sizes_[k]);
    g_p = g_phi.row(k) * inv_size;
    if (weights_.variance > 0.0) g_p += 2.0 * weights_.variance * inv_size * (p.row(row) - phi.row(k));
    const double dot = g_p.dot(p.row(row));
    g_z.row(row) = (p.row(row).array() * (g_p.array() - dot)).matrix();
  }
  for (std::size_t i = 0; i < labeled_pixels_.size(); ++i) {
    const auto row = Eigen::Index(labeled_pixels_[i]);
    g_z.row(row) += p.row(row);
    g_z(row, labeled_class_[i]) -= 1.0;
  }

  *gradient = exec == Exec::Serial ? kernels::ref::mlp_backward(params, pixels_, g_z)
                                   : kernels::omp::mlp_backward(params, pixels_, g_z);
  for (double g : *gradient) {
    if (!std::isfinite(g)) throw NumericalError("loss: gradient is non-finite");
  }
  return out;
}

}  // namespace grnn
