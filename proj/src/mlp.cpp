#include "grnn/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "grnn/io.hpp"
#include "grnn/kernels.hpp"

namespace grnn {

MlpLayout::MlpLayout(const MlpShape& s) {
  w1 = 0;
  b1 = w1 + std::size_t(s.hidden1) * s.inputs;
  w2 = b1 + s.hidden1;
  b2 = w2 + std::size_t(s.hidden2) * s.hidden1;
  w3 = b2 + s.hidden2;
  b3 = w3 + std::size_t(s.classes) * s.hidden2;
  total = b3 + s.classes;
}

MlpParams init_mlp(const MlpShape& shape, std::uint64_t seed, double slope) {
  if (shape.inputs < 1 || shape.hidden1 < 1 || shape.hidden2 < 1 || shape.classes < 1) {
    throw Error("layer sizes must be >= 1");
  }
  MlpParams p;
  p.shape = shape;
  p.slope = slope;
  p.seed = seed;
  const MlpLayout L(shape);
  p.theta.assign(L.total, 0.0);

  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, int fan_out, int fan_in) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < std::size_t(fan_out) * fan_in; ++i) p.theta[offset + i] = dist(rng);
  };
  fill(L.w1, shape.hidden1, shape.inputs);
  fill(L.w2, shape.hidden2, shape.hidden1);
  fill(L.w3, shape.classes, shape.hidden2);
  return p;
}

std::vector<double> forward(const MlpParams& params, std::span<const double> x) {
  if (x.size() != std::size_t(params.shape.inputs)) throw Error("input size mismatch");
  RowMatrix row = Eigen::Map<const RowMatrix>(x.data(), 1, params.shape.inputs);
  const RowMatrix p = softmax_rows(kernels::ref::mlp_logits(params, row));
  return {p.data(), p.data() + p.size()};
}

RowMatrix logits(const MlpParams& params, const RowMatrix& x, Exec exec) {
  if (x.cols() != params.shape.inputs) throw Error("input size mismatch");
  return exec == Exec::Serial ? kernels::ref::mlp_logits(params, x)
                              : kernels::omp::mlp_logits(params, x);
}

RowMatrix softmax_rows(const RowMatrix& z) {
  RowMatrix p(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    const double m = z.row(j).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index q = 0; q < z.cols(); ++q) {
      p(j, q) = std::exp(z(j, q) - m);
      sum += p(j, q);
    }
    p.row(j) /= sum;
  }
  return p;
}

RowMatrix predict(const MlpParams& params, const RowMatrix& x, Exec exec) {
  return softmax_rows(logits(params, x, exec));
}

RowMatrix pixel_matrix(const FeatureCube& cube) {
  return Eigen::Map<const RowMatrix>(cube.data.data(), Eigen::Index(cube.pixels()), cube.bands);
}

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> gradient) {
  if (theta.size() != gradient.size() || state.m.size() != theta.size()) {
    throw Error("adam: parameter/gradient/state size mismatch");
  }
  const auto& c = state.config;
  ++state.step;
  const double correction1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, double(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = gradient[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void save_checkpoint(const MlpParams& params, const std::filesystem::path& header_path) {
  auto raw_path = header_path;
  raw_path.replace_extension(".raw");
  const nlohmann::json header = {
      {"kind", "mlp"},
      {"sizes", {params.shape.inputs, params.shape.hidden1, params.shape.hidden2, params.shape.classes}},
      {"negative_slope", params.slope},
      {"seed", params.seed},
      {"parameters", params.theta.size()},
      {"dtype", "f32"},
      {"byte_order", "little"},
      {"data_file", raw_path.filename().string()}};
  std::vector<float> blob(params.theta.begin(), params.theta.end());
  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error("cannot open for writing: " + raw_path.string());
  raw.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size() * sizeof(float)));
  if (!raw) throw Error("write failed: " + raw_path.string());
  io::write_text(header_path, header.dump(2) + "\n");
}

MlpParams load_checkpoint(const std::filesystem::path& header_path) {
  const auto header = io::read_header(header_path);
  const auto sizes = header.at("sizes").get<std::vector<int>>();
  if (sizes.size() != 4) throw Error("checkpoint sizes must have 4 entries");
  MlpParams p;
  p.shape = {sizes[0], sizes[1], sizes[2], sizes[3]};
  p.slope = header.value("negative_slope", 0.1);
  p.seed = header.value("seed", std::uint64_t(0));
  const auto raw_path = header_path.parent_path() / header.at("data_file").get<std::string>();
  const auto n = p.shape.parameter_count();
  if (std::filesystem::file_size(raw_path) != n * sizeof(float)) {
    throw Error("size mismatch: checkpoint blob does not match layer sizes");
  }
  std::vector<float> blob(n);
  std::ifstream raw(raw_path, std::ios::binary);
  raw.read(reinterpret_cast<char*>(blob.data()), std::streamsize(n * sizeof(float)));
  if (!raw) throw Error("read failed: " + raw_path.string());
  p.theta.assign(blob.begin(), blob.end());
  return p;
}

}  // namespace grnn
