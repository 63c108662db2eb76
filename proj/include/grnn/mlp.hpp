#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "grnn/core.hpp"
#include "grnn/parallel.hpp"

namespace grnn {

/// Layer widths of the pixelwise classifier: inputs -> hidden1 -> hidden2 -> classes.
struct MlpShape {
  int inputs = 0;
  int hidden1 = 0;
  int hidden2 = 0;
  int classes = 0;

  std::size_t parameter_count() const {
    return std::size_t(inputs + 1) * hidden1 + std::size_t(hidden1 + 1) * hidden2 +
           std::size_t(hidden2 + 1) * classes;
  }
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// Offsets of each tensor inside the flat parameter vector. Weights are
/// row-major (out x in); layer order W1, b1, W2, b2, W3, b3.
struct MlpLayout {
  std::size_t w1, b1, w2, b2, w3, b3, total;
  explicit MlpLayout(const MlpShape& s);
};

/// Two leaky-ReLU hidden layers followed by softmax.
struct MlpParams {
  MlpShape shape;
  double slope = 0.1;
  std::uint64_t seed = 0;
  std::vector<double> theta;

  MlpLayout layout() const { return MlpLayout(shape); }
};

inline double leaky_relu(double u, double slope) { return u > 0.0 ? u : slope * u; }

/// Glorot-uniform weights, zero biases.
MlpParams init_mlp(const MlpShape& shape, std::uint64_t seed, double slope = 0.1);

/// Class probabilities for a single pixel.
std::vector<double> forward(const MlpParams& params, std::span<const double> x);

/// Pre-softmax outputs for every row of `x` (n x inputs).
RowMatrix logits(const MlpParams& params, const RowMatrix& x, Exec exec = Exec::Parallel);

/// Row-wise softmax of `z`.
RowMatrix softmax_rows(const RowMatrix& z);

/// Softmax probabilities for every row of `x`.
RowMatrix predict(const MlpParams& params, const RowMatrix& x, Exec exec = Exec::Parallel);

/// Pixel features of a cube as an (H*W) x bands matrix in raster order.
RowMatrix pixel_matrix(const FeatureCube& cube);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `theta` in place.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> gradient);

// Checkpoint: JSON header (sizes, slope, seed) + raw little-endian f32 parameters.
void save_checkpoint(const MlpParams& params, const std::filesystem::path& header_path);
MlpParams load_checkpoint(const std::filesystem::path& header_path);

}  // namespace grnn
