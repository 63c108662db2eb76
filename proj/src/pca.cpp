#include "grnn/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "grnn/io.hpp"
#include "grnn/kernels.hpp"

namespace grnn {

PcaModel fit_pca(const HsiCube& cube, const PcaConfig& cfg) {
  validate(cube);
  if (!(cfg.variance_target > 0.0 && cfg.variance_target <= 1.0)) {
    throw Error("variance target must lie in (0, 1]");
  }
  const int B = cube.bands;
  const std::size_t n = cube.pixels();

  // Mean of the data shifted by the first pixel, so identical pixels give an exact mean.
  Eigen::VectorXd shift(B), mean = Eigen::VectorXd::Zero(B);
  for (int j = 0; j < B; ++j) shift[j] = cube.pixel(0)[j];
  for (std::size_t p = 0; p < n; ++p) {
    const float* x = cube.pixel(p);
    for (int j = 0; j < B; ++j) mean[j] += double(x[j]) - shift[j];
  }
  mean = mean / double(n) + shift;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(B, B);
  Eigen::VectorXd centered(B);
  for (std::size_t p = 0; p < n; ++p) {
    const float* x = cube.pixel(p);
    for (int j = 0; j < B; ++j) centered[j] = double(x[j]) - mean[j];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= double(n);

  PcaModel model;
  model.mean = mean;
  model.scale = Eigen::VectorXd::Ones(B);
  if (cfg.standardize) {
    for (int j = 0; j < B; ++j) {
      const double sd = std::sqrt(cov(j, j));
      if (sd > 0.0) model.scale[j] = sd;
    }
    const Eigen::VectorXd inv = model.scale.cwiseInverse();
    cov = inv.asDiagonal() * cov * inv.asDiagonal();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");
  // Eigen returns ascending order.
  Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  for (int i = 0; i < B; ++i) {
    Eigen::Index arg;
    vectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, i) < 0) vectors.col(i) *= -1.0;
  }

  model.total_variance = values.sum();
  int keep = 1;
  if (model.total_variance <= 0.0) {
    model.degenerate = true;
    std::cerr << "warning: pca: cube has zero covariance; keeping one zero-variance component\n";
  } else {
    double cumulative = 0.0;
    keep = B;
    for (int i = 0; i < B; ++i) {
      cumulative += values[i];
      if (cumulative / model.total_variance >= cfg.variance_target) {
        keep = i + 1;
        break;
      }
    }
    keep = int(std::min<std::size_t>(std::size_t(keep), n));
  }
  model.components = vectors.leftCols(keep).transpose();
  model.explained_variance = values.head(keep);
  return model;
}

FeatureCube apply_pca(const PcaModel& model, const HsiCube& cube, Exec exec) {
  if (cube.bands != model.input_bands()) {
    throw Error("band mismatch: model expects " + std::to_string(model.input_bands()) +
                " bands, cube has " + std::to_string(cube.bands));
  }
  return exec == Exec::Serial
             ? kernels::ref::pca_project(cube, model.mean, model.scale, model.components)
             : kernels::omp::pca_project(cube, model.mean, model.scale, model.components);
}

FeatureCube inverse_pca(const PcaModel& model, const FeatureCube& reduced) {
  if (reduced.bands != model.output_bands()) throw Error("component count mismatch");
  const int B = model.input_bands();
  FeatureCube out(reduced.height, reduced.width, B);
  for (std::size_t p = 0; p < reduced.pixels(); ++p) {
    Eigen::Map<const Eigen::VectorXd> y(reduced.pixel(p), reduced.bands);
    Eigen::Map<Eigen::VectorXd> x(out.pixel(p), B);
    x = (model.components.transpose() * y).cwiseProduct(model.scale) + model.mean;
  }
  return out;
}

Image first_component_image(const FeatureCube& reduced) {
  Image img(reduced.height, reduced.width);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t p = 0; p < reduced.pixels(); ++p) {
    const double v = reduced.pixel(p)[0];
    img.data[p] = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (auto& v : img.data) v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  return img;
}

void save_pca(const PcaModel& model, const std::filesystem::path& header_path) {
  auto raw_path = header_path;
  raw_path.replace_extension(".raw");
  const nlohmann::json header = {{"kind", "pca"},
                                 {"input_bands", model.input_bands()},
                                 {"output_bands", model.output_bands()},
                                 {"total_variance", model.total_variance},
                                 {"degenerate", model.degenerate},
                                 {"dtype", "f64"},
                                 {"byte_order", "little"},
                                 {"layout", "mean,scale,explained_variance,components"},
                                 {"data_file", raw_path.filename().string()}};
  std::vector<double> blob;
  blob.insert(blob.end(), model.mean.data(), model.mean.data() + model.mean.size());
  blob.insert(blob.end(), model.scale.data(), model.scale.data() + model.scale.size());
  blob.insert(blob.end(), model.explained_variance.data(),
              model.explained_variance.data() + model.explained_variance.size());
  blob.insert(blob.end(), model.components.data(), model.components.data() + model.components.size());
  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error("cannot open for writing: " + raw_path.string());
  raw.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size() * sizeof(double)));
  if (!raw) throw Error("write failed: " + raw_path.string());
  io::write_text(header_path, header.dump(2) + "\n");
}

PcaModel load_pca(const std::filesystem::path& header_path) {
  const auto header = io::read_header(header_path);
  const int B = header.at("input_bands").get<int>();
  const int b = header.at("output_bands").get<int>();
  const std::size_t n = std::size_t(B) * 2 + b + std::size_t(b) * B;
  const auto raw_path = header_path.parent_path() / header.at("data_file").get<std::string>();
  if (std::filesystem::file_size(raw_path) != n * sizeof(double)) {
    throw Error("size mismatch: pca blob does not match header");
  }
  std::vector<double> blob(n);
  std::ifstream raw(raw_path, std::ios::binary);
  raw.read(reinterpret_cast<char*>(blob.data()), std::streamsize(n * sizeof(double)));
  if (!raw) throw Error("read failed: " + raw_path.string());
  PcaModel m;
  const double* d = blob.data();
  m.mean = Eigen::Map<const Eigen::VectorXd>(d, B);
  m.scale = Eigen::Map<const Eigen::VectorXd>(d + B, B);
  m.explained_variance = Eigen::Map<const Eigen::VectorXd>(d + 2 * B, b);
  m.components = Eigen::Map<const RowMatrix>(d + 2 * B + b, b, B);
  m.total_variance = header.value("total_variance", 0.0);
  m.degenerate = header.value("degenerate", false);
  return m;
}

}  // namespace grnn
