#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace grnn {

/// Raised for malformed inputs: bad files, inconsistent shapes, invalid configs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical stage produces NaN/Inf; the message names the stage.
class NumericalError : public Error {
 public:
  using Error::Error;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H x W x B raster stored in (row, col, band) order.
template <class T>
struct Raster {
  int height = 0;
  int width = 0;
  int bands = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int h, int w, int b) : height(h), width(w), bands(b), data(std::size_t(h) * w * b, T{}) {}

  std::size_t pixels() const { return std::size_t(height) * width; }
  std::size_t index(int row, int col, int band) const {
    return (std::size_t(row) * width + col) * bands + band;
  }
  T& at(int row, int col, int band) { return data[index(row, col, band)]; }
  const T& at(int row, int col, int band) const { return data[index(row, col, band)]; }
  const T* pixel(std::size_t p) const { return data.data() + p * bands; }
  T* pixel(std::size_t p) { return data.data() + p * bands; }
};

/// Reflectance cube as stored on disk (32-bit).
using HsiCube = Raster<float>;
/// Working-precision cube (PCA output, classifier input).
using FeatureCube = Raster<double>;

/// Throws unless dimensions are positive, the buffer length matches, and every value is finite.
void validate(const HsiCube& cube);

/// Single-channel H x W image in double precision.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0) : height(h), width(w), data(std::size_t(h) * w, fill) {}
  double& operator()(int r, int c) { return data[std::size_t(r) * width + c]; }
  double operator()(int r, int c) const { return data[std::size_t(r) * width + c]; }
};

struct LabelEntry {
  int row = 0;
  int col = 0;
  int class_id = 0;  // 1-based

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

/// Sparse pixel -> class assignment. Class ids are 1..num_classes.
struct LabelMap {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<LabelEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Throws on out-of-range coordinates or class ids, or duplicate pixels.
void validate(const LabelMap& labels);

/// Pixel -> superpixel partition with superpixel ids 0..count-1.
struct Segmentation {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<std::uint32_t> assignment;

  std::uint32_t operator()(int r, int c) const { return assignment[std::size_t(r) * width + c]; }
  std::size_t pixels() const { return assignment.size(); }
  /// Pixel count per superpixel.
  std::vector<std::size_t> sizes() const;
  /// Pixel indices grouped by superpixel, each list in raster order.
  std::vector<std::vector<std::size_t>> members() const;
};

/// Throws unless the assignment is a total partition into non-empty 4-connected regions.
void validate(const Segmentation& seg);

enum class Provenance : std::uint8_t { Predicted = 0, GroundTruth = 1, Fallback = 2 };

/// Per-pixel class map; 0 means unclassified.
struct ClassificationMap {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<int> labels;
  std::vector<Provenance> provenance;

  ClassificationMap() = default;
  ClassificationMap(int h, int w, int c)
      : height(h), width(w), num_classes(c), labels(std::size_t(h) * w, 0),
        provenance(std::size_t(h) * w, Provenance::Predicted) {}
  int operator()(int r, int c) const { return labels[std::size_t(r) * width + c]; }
};

/// Flags pixels that carry a ground-truth label; map labels are left untouched.
void mark_ground_truth(ClassificationMap& map, const LabelMap& truth);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Black for index 0 followed by c well-separated hues.
std::vector<Rgb> default_palette(int num_classes);

}  // namespace grnn
