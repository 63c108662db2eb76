#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "grnn/core.hpp"

namespace testing {

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("grnn_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline grnn::HsiCube random_cube(int h, int w, int b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  grnn::HsiCube cube(h, w, b);
  for (auto& v : cube.data) v = u(rng);
  return cube;
}

inline grnn::FeatureCube random_features(int h, int w, int b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  grnn::FeatureCube cube(h, w, b);
  for (auto& v : cube.data) v = n(rng);
  return cube;
}

}  // namespace testing
