#include "grnn/propagate.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include <Eigen/Cholesky>

#include "grnn/io.hpp"
#include "grnn/labels.hpp"

namespace grnn {

LabelMap confident_set(const RowMatrix& probabilities, int height, int width, double tau) {
  if (std::size_t(probabilities.rows()) != std::size_t(height) * width) {
    throw Error("confident_set: probability rows do not match image size");
  }
  LabelMap out;
  out.height = height;
  out.width = width;
  out.num_classes = int(probabilities.cols());
  for (Eigen::Index j = 0; j < probabilities.rows(); ++j) {
    const int q = argmax(probabilities.row(j).data(), int(probabilities.cols()));
    if (probabilities(j, q) >= tau) out.entries.push_back({int(j / width), int(j % width), q + 1});
  }
  return out;
}

LabelMap confident_set(const MlpParams& params, const FeatureCube& reduced, double tau, Exec exec) {
  return confident_set(predict(params, pixel_matrix(reduced), exec), reduced.height, reduced.width,
                       tau);
}

LabelMap merge_labels(const LabelMap& base, const LabelMap& confident) {
  if (base.height != confident.height || base.width != confident.width) {
    throw Error("merge_labels: shapes differ");
  }
  std::map<std::pair<int, int>, int> merged;
  for (const auto& e : confident.entries) merged[{e.row, e.col}] = e.class_id;
  for (const auto& e : base.entries) merged[{e.row, e.col}] = e.class_id;
  LabelMap out;
  out.height = base.height;
  out.width = base.width;
  out.num_classes = std::max(base.num_classes, confident.num_classes);
  for (const auto& [rc, q] : merged) out.entries.push_back({rc.first, rc.second, q});
  return out;
}

RowMatrix propagate_direct(const Eigen::SparseMatrix<double>& s, const RowMatrix& t, double alpha) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(s.rows(), s.cols()) - alpha * Eigen::MatrixXd(s);
  // I - alpha S is symmetric positive definite for alpha < 1 and spectral radius <= 1.
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("propagate: system is not positive definite");
  return llt.solve(Eigen::MatrixXd(t));
}

RowMatrix propagate_fixed_point(const Eigen::SparseMatrix<double>& s, const RowMatrix& t,
                                double alpha, double tolerance, int max_iters) {
  RowMatrix f = t;
  for (int it = 0; it < max_iters; ++it) {
    RowMatrix next = alpha * (s * f) + t;
    const double residual = (next - f).cwiseAbs().maxCoeff();
    f = std::move(next);
    if (residual < tolerance) return f;
  }
  throw NumericalError("propagate: fixed-point iteration did not converge");
}

RowMatrix propagate(const SuperpixelGraph& graph, const RowMatrix& t, double alpha, Solver solver) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error("propagate: alpha must lie in [0, 1)");
  if (t.rows() != graph.n) throw Error("propagate: label matrix rows do not match graph");
  const auto s = normalized_adjacency(graph);
  if (solver == Solver::Auto) solver = graph.n <= kDirectSolveLimit ? Solver::Direct : Solver::FixedPoint;
  return solver == Solver::Direct ? propagate_direct(s, t, alpha)
                                  : propagate_fixed_point(s, t, alpha);
}

ClassificationMap final_labels(const RowMatrix& t_star, const Segmentation& seg) {
  if (t_star.rows() != seg.count) throw Error("final_labels: row count does not match segmentation");
  const int c = int(t_star.cols());
  ClassificationMap map(seg.height, seg.width, c);
  std::vector<int> cls(seg.count);
  std::vector<char> fallback(seg.count, 0);
  for (int k = 0; k < seg.count; ++k) {
    const int q = argmax(t_star.row(k).data(), c);
    cls[k] = q + 1;
    fallback[k] = t_star(k, q) > 0.0 ? 0 : 1;
  }
  for (std::size_t p = 0; p < seg.pixels(); ++p) {
    const auto k = seg.assignment[p];
    map.labels[p] = cls[k];
    map.provenance[p] = fallback[k] ? Provenance::Fallback : Provenance::Predicted;
  }
  return map;
}

ClassificationMap pixel_labels(const RowMatrix& probabilities, int height, int width) {
  ClassificationMap map(height, width, int(probabilities.cols()));
  for (Eigen::Index j = 0; j < probabilities.rows(); ++j) {
    map.labels[j] = argmax(probabilities.row(j).data(), int(probabilities.cols())) + 1;
  }
  return map;
}

void save_matrix_csv(const RowMatrix& m, const std::filesystem::path& path) {
  std::string out;
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c ? ",%.17g" : "%.17g", m(r, c));
      out += buf;
    }
    out += '\n';
  }
  io::write_text(path, out);
}

}  // namespace grnn
