#include "grnn/labels.hpp"

namespace grnn {

std::vector<double> one_hot(int y, int c) {
  if (c < 1 || y < 1 || y > c) {
    throw Error("one_hot: class " + std::to_string(y) + " outside 1.." + std::to_string(c));
  }
  std::vector<double> v(c, 0.0);
  v[y - 1] = 1.0;
  return v;
}

int SuperpixelLabels::labeled_count() const {
  int n = 0;
  for (char l : labeled) n += l ? 1 : 0;
  return n;
}

int argmax(const double* v, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

SuperpixelLabels soft_labels(const LabelMap& labels, const Segmentation& seg, int num_classes) {
  if (labels.height != seg.height || labels.width != seg.width) {
    throw Error("labels: label map and segmentation shapes differ");
  }
  SuperpixelLabels sl;
  sl.num_classes = num_classes;
  sl.soft = RowMatrix::Zero(seg.count, num_classes);
  sl.labeled.assign(seg.count, 0);
  std::vector<int> count(seg.count, 0);
  for (const auto& e : labels.entries) {
    if (e.class_id < 1 || e.class_id > num_classes) throw Error("labels: class id out of range");
    const auto k = seg(e.row, e.col);
    sl.soft(k, e.class_id - 1) += 1.0;
    ++count[k];
  }
  for (int k = 0; k < seg.count; ++k) {
    if (count[k] == 0) continue;
    sl.soft.row(k) /= double(count[k]);
    sl.labeled[k] = 1;
  }
  hard_labels(sl);
  return sl;
}

void hard_labels(SuperpixelLabels& sl) {
  sl.hard = RowMatrix::Zero(sl.soft.rows(), sl.soft.cols());
  for (Eigen::Index k = 0; k < sl.soft.rows(); ++k) {
    if (!sl.labeled[k]) continue;
    sl.hard(k, argmax(sl.soft.row(k).data(), int(sl.soft.cols()))) = 1.0;
  }
}

}  // namespace grnn
