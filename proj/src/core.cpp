#include "grnn/core.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace grnn {

void validate(const HsiCube& cube) {
  if (cube.height < 1 || cube.width < 1 || cube.bands < 1) {
    throw Error("cube dimensions must be positive");
  }
  if (cube.data.size() != std::size_t(cube.height) * cube.width * cube.bands) {
    throw Error("cube data length does not match H*W*B");
  }
  for (float v : cube.data) {
    if (!std::isfinite(v)) throw Error("cube contains non-finite values");
  }
}

void validate(const LabelMap& labels) {
  std::set<std::pair<int, int>> seen;
  for (const auto& e : labels.entries) {
    if (e.row < 0 || e.row >= labels.height || e.col < 0 || e.col >= labels.width) {
      throw Error("label coordinate out of range: (" + std::to_string(e.row) + "," +
                  std::to_string(e.col) + ")");
    }
    if (e.class_id < 1 || e.class_id > labels.num_classes) {
      throw Error("class id out of range: " + std::to_string(e.class_id));
    }
    if (!seen.emplace(e.row, e.col).second) {
      throw Error("duplicate label for pixel (" + std::to_string(e.row) + "," +
                  std::to_string(e.col) + ")");
    }
  }
}

std::vector<std::size_t> Segmentation::sizes() const {
  std::vector<std::size_t> out(count, 0);
  for (auto k : assignment) ++out[k];
  return out;
}

std::vector<std::vector<std::size_t>> Segmentation::members() const {
  std::vector<std::vector<std::size_t>> out(count);
  for (std::size_t p = 0; p < assignment.size(); ++p) out[assignment[p]].push_back(p);
  return out;
}

void validate(const Segmentation& seg) {
  if (seg.height < 1 || seg.width < 1 || seg.count < 1) {
    throw Error("segmentation dimensions must be positive");
  }
  if (seg.assignment.size() != std::size_t(seg.height) * seg.width) {
    throw Error("segmentation size mismatch");
  }
  for (auto k : seg.assignment) {
    if (k >= std::uint32_t(seg.count)) throw Error("superpixel index out of range");
  }
  // One flood fill per superpixel must cover all of its pixels.
  const auto sizes = seg.sizes();
  std::vector<char> visited(seg.pixels(), 0);
  std::vector<char> started(seg.count, 0);
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < seg.pixels(); ++p) {
    const auto k = seg.assignment[p];
    if (visited[p]) continue;
    if (started[k]) throw Error("superpixel " + std::to_string(k) + " is not 4-connected");
    started[k] = 1;
    std::size_t reached = 0;
    stack.assign(1, p);
    visited[p] = 1;
    while (!stack.empty()) {
      const auto q = stack.back();
      stack.pop_back();
      ++reached;
      const int r = int(q / seg.width), c = int(q % seg.width);
      const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int rr = r + dr[d], cc = c + dc[d];
        if (rr < 0 || rr >= seg.height || cc < 0 || cc >= seg.width) continue;
        const auto nq = std::size_t(rr) * seg.width + cc;
        if (!visited[nq] && seg.assignment[nq] == k) {
          visited[nq] = 1;
          stack.push_back(nq);
        }
      }
    }
    if (reached != sizes[k]) throw Error("superpixel " + std::to_string(k) + " is not 4-connected");
  }
  for (int k = 0; k < seg.count; ++k) {
    if (sizes[k] == 0) throw Error("superpixel " + std::to_string(k) + " is empty");
  }
}

void mark_ground_truth(ClassificationMap& map, const LabelMap& truth) {
  for (const auto& e : truth.entries) {
    map.provenance[std::size_t(e.row) * map.width + e.col] = Provenance::GroundTruth;
  }
}

std::vector<Rgb> default_palette(int num_classes) {
  std::vector<Rgb> out;
  out.reserve(num_classes + 1);
  out.push_back({0, 0, 0});
  for (int q = 0; q < num_classes; ++q) {
    // Golden-angle hue walk, full saturation.
    const double hue = std::fmod(q * 137.50776405, 360.0) / 60.0;
    const double value = q % 2 == 0 ? 1.0 : 0.75;
    const double x = value * (1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (int(hue)) {
      case 0: r = value, g = x; break;
      case 1: r = x, g = value; break;
      case 2: g = value, b = x; break;
      case 3: g = x, b = value; break;
      case 4: r = x, b = value; break;
      default: r = value, b = x; break;
    }
    out.push_back({std::uint8_t(std::lround(r * 255)), std::uint8_t(std::lround(g * 255)),
                   std::uint8_t(std::lround(b * 255))});
  }
  return out;
}

}  // namespace grnn
