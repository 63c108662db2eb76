#pragma once

#include <vector>

#include "grnn/core.hpp"

namespace grnn {

/// c-vector with a 1 at class y (1-based).
std::vector<double> one_hot(int y, int c);

/// Soft (class frequencies) and hard (argmax one-hot) labels per superpixel.
/// Rows of superpixels without labeled pixels are all zero.
struct SuperpixelLabels {
  int num_classes = 0;
  RowMatrix soft;  // N x c
  RowMatrix hard;  // N x c
  std::vector<char> labeled;

  int labeled_count() const;
};

/// Soft labels from the pixels of `labels` falling in each superpixel; hard labels filled too.
SuperpixelLabels soft_labels(const LabelMap& labels, const Segmentation& seg, int num_classes);

/// Recomputes `hard` from `soft`; ties go to the lowest class index.
void hard_labels(SuperpixelLabels& sl);

/// Argmax with ties resolved to the lowest index.
int argmax(const double* v, int n);

}  // namespace grnn
