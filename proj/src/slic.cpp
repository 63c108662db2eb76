#include "grnn/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "grnn/kernels.hpp"

namespace grnn {

namespace {

using kernels::SlicCenter;

struct SeedLayout {
  std::vector<SlicCenter> centers;
  std::vector<int> row_offset;  // first center index per seed row
  std::vector<int> row_count;
};

double gradient_at(const Image& img, int r, int c) {
  auto at = [&](int rr, int cc) {
    return img(std::clamp(rr, 0, img.height - 1), std::clamp(cc, 0, img.width - 1));
  };
  const double gy = at(r + 1, c) - at(r - 1, c);
  const double gx = at(r, c + 1) - at(r, c - 1);
  return gx * gx + gy * gy;
}

// N seeds in ny rows; rows hold floor-distributed counts so the total is exactly N.
SeedLayout place_seeds(const Image& img, int n) {
  const int h = img.height, w = img.width;
  int ny = std::clamp(int(std::lround(std::sqrt(double(n) * h / w))), 1, std::min(n, h));
  auto row_count = [&](int rows, int i) { return int((long(i) + 1) * n / rows - long(i) * n / rows); };
  while (ny < h && row_count(ny, 0) > w) ++ny;

  SeedLayout layout;
  for (int i = 0; i < ny; ++i) {
    const int count = row_count(ny, i);
    layout.row_offset.push_back(int(layout.centers.size()));
    layout.row_count.push_back(count);
    const double row = (i + 0.5) * h / ny - 0.5;
    for (int j = 0; j < count; ++j) {
      SlicCenter c{row, (j + 0.5) * w / count - 0.5, 0.0};
      const int r0 = std::clamp(int(std::lround(c.row)), 0, h - 1);
      const int c0 = std::clamp(int(std::lround(c.col)), 0, w - 1);
      // Move to the lowest-gradient pixel of the 3x3 neighbourhood only on a strict improvement.
      double best = gradient_at(img, r0, c0);
      int br = r0, bc = c0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r0 + dr, cc = c0 + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const double g = gradient_at(img, rr, cc);
          if (g < best) {
            best = g;
            br = rr;
            bc = cc;
          }
        }
      }
      if (br != r0 || bc != c0) {
        c.row = br;
        c.col = bc;
      }
      c.intensity = img(br, bc);
      layout.centers.push_back(c);
    }
  }
  return layout;
}

std::vector<std::uint32_t> initial_labels(const Image& img, const SeedLayout& layout) {
  const int ny = int(layout.row_count.size());
  std::vector<std::uint32_t> labels(std::size_t(img.height) * img.width);
  for (int r = 0; r < img.height; ++r) {
    const int i = std::min(ny - 1, int(std::int64_t(r) * ny / img.height));
    const int n_i = layout.row_count[i];
    for (int c = 0; c < img.width; ++c) {
      const int j = std::min(n_i - 1, int(std::int64_t(c) * n_i / img.width));
      labels[std::size_t(r) * img.width + c] = std::uint32_t(layout.row_offset[i] + j);
    }
  }
  return labels;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

// Region adjacency over a label image (4-connectivity).
std::vector<std::set<int>> region_adjacency(const std::vector<std::uint32_t>& labels, int h, int w,
                                            int count) {
  std::vector<std::set<int>> adj(count);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto a = int(labels[std::size_t(r) * w + c]);
      if (c + 1 < w) {
        const auto b = int(labels[std::size_t(r) * w + c + 1]);
        if (a != b) adj[a].insert(b), adj[b].insert(a);
      }
      if (r + 1 < h) {
        const auto b = int(labels[std::size_t(r + 1) * w + c]);
        if (a != b) adj[a].insert(b), adj[b].insert(a);
      }
    }
  }
  return adj;
}

Segmentation compact(const std::vector<std::uint32_t>& labels, DisjointSets& sets, int h, int w) {
  Segmentation seg;
  seg.height = h;
  seg.width = w;
  seg.assignment.resize(labels.size());
  std::vector<int> remap(sets.parent.size(), -1);
  int next = 0;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int root = sets.find(int(labels[p]));
    if (remap[root] < 0) remap[root] = next++;
    seg.assignment[p] = std::uint32_t(remap[root]);
  }
  seg.count = next;
  return seg;
}

// Merges the smallest superpixel into its adjacent superpixel of closest mean
// intensity until at most `limit` remain. Unions of adjacent connected regions
// stay connected.
Segmentation merge_down(const Segmentation& seg, const Image& img, int limit) {
  const int n = seg.count;
  std::vector<double> size(n, 0.0), sum(n, 0.0);
  for (std::size_t p = 0; p < seg.pixels(); ++p) {
    size[seg.assignment[p]] += 1.0;
    sum[seg.assignment[p]] += img.data[p];
  }
  auto adj = region_adjacency(seg.assignment, seg.height, seg.width, n);
  DisjointSets sets(n);
  std::set<std::pair<double, int>> by_size;
  for (int k = 0; k < n; ++k) by_size.emplace(size[k], k);
  int alive = n;
  while (alive > limit && by_size.size() > 1) {
    const int a = by_size.begin()->second;
    by_size.erase(by_size.begin());
    if (adj[a].empty()) continue;
    const double mean_a = sum[a] / size[a];
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b : adj[a]) {
      const double d = std::fabs(sum[b] / size[b] - mean_a);
      if (d < best_d) best_d = d, best = b;
    }
    by_size.erase({size[best], best});
    sets.parent[a] = best;
    size[best] += size[a];
    sum[best] += sum[a];
    for (int c : adj[a]) {
      if (c == best) continue;
      adj[c].erase(a);
      adj[c].insert(best);
      adj[best].insert(c);
    }
    adj[best].erase(a);
    adj[a].clear();
    by_size.emplace(size[best], best);
    --alive;
  }
  return compact(seg.assignment, sets, seg.height, seg.width);
}

}  // namespace

void SlicConfig::validate(int height, int width) const {
  if (n_superpixels < 1) throw Error("slic: n_superpixels must be >= 1");
  if (std::int64_t(n_superpixels) > std::int64_t(height) * width) {
    throw Error("slic: n_superpixels exceeds pixel count");
  }
  if (!(compactness > 0.0)) throw Error("slic: compactness must be > 0");
  if (max_iters < 1) throw Error("slic: max_iters must be >= 1");
  if (min_size_fraction < 0.0) throw Error("slic: min_size_fraction must be >= 0");
}

Segmentation enforce_connectivity(const std::vector<std::uint32_t>& raw, int height, int width,
                                  int n_target, double min_size_fraction) {
  const std::size_t n_pixels = std::size_t(height) * width;
  if (raw.size() != n_pixels) throw Error("assignment size mismatch");

  // 4-connected components in raster order.
  std::vector<std::uint32_t> comp(n_pixels, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> comp_size;
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < n_pixels; ++p) {
    if (comp[p] != std::numeric_limits<std::uint32_t>::max()) continue;
    const auto id = std::uint32_t(comp_size.size());
    std::size_t count = 0;
    comp[p] = id;
    stack.assign(1, p);
    while (!stack.empty()) {
      const auto q = stack.back();
      stack.pop_back();
      ++count;
      const int r = int(q / width), c = int(q % width);
      const std::size_t nb[4] = {r > 0 ? q - width : q, r + 1 < height ? q + width : q,
                                 c > 0 ? q - 1 : q, c + 1 < width ? q + 1 : q};
      for (auto nq : nb) {
        if (comp[nq] == std::numeric_limits<std::uint32_t>::max() && raw[nq] == raw[q]) {
          comp[nq] = id;
          stack.push_back(nq);
        }
      }
    }
    comp_size.push_back(double(count));
  }

  const int n = int(comp_size.size());
  const double threshold = min_size_fraction * double(n_pixels) / std::max(1, n_target);
  auto adj = region_adjacency(comp, height, width, n);
  DisjointSets sets(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return comp_size[a] < comp_size[b]; });
  std::vector<double> size = comp_size;
  for (int a : order) {
    if (sets.find(a) != a || size[a] >= threshold) continue;
    int best = -1;
    for (int b : adj[a]) {
      const int rb = sets.find(b);
      if (rb == a) continue;
      if (best < 0 || size[rb] > size[best] || (size[rb] == size[best] && rb < best)) best = rb;
    }
    if (best < 0) continue;
    sets.parent[a] = best;
    size[best] += size[a];
    adj[best].insert(adj[a].begin(), adj[a].end());
  }
  return compact(comp, sets, height, width);
}

Segmentation slic_segment(const Image& image, const SlicConfig& cfg, Exec exec) {
  cfg.validate(image.height, image.width);
  for (double v : image.data) {
    if (!std::isfinite(v)) throw Error("slic: image contains non-finite values");
  }
  const double step = std::sqrt(double(image.height) * image.width / cfg.n_superpixels);
  auto layout = place_seeds(image, cfg.n_superpixels);
  auto& centers = layout.centers;
  auto labels = initial_labels(image, layout);

  const std::size_t n_pixels = labels.size();
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const auto previous = labels;
    if (exec == Exec::Serial) {
      kernels::ref::slic_assign(image, centers, step, cfg.compactness, labels);
    } else {
      kernels::omp::slic_assign(image, centers, step, cfg.compactness, labels);
    }
    std::vector<double> sr(centers.size(), 0.0), sc(centers.size(), 0.0), si(centers.size(), 0.0),
        count(centers.size(), 0.0);
    for (std::size_t p = 0; p < n_pixels; ++p) {
      const auto k = labels[p];
      sr[k] += double(p / image.width);
      sc[k] += double(p % image.width);
      si[k] += image.data[p];
      count[k] += 1.0;
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (count[k] == 0.0) continue;
      centers[k] = {sr[k] / count[k], sc[k] / count[k], si[k] / count[k]};
    }
    if (labels == previous) break;
  }

  auto seg = enforce_connectivity(labels, image.height, image.width, cfg.n_superpixels,
                                  cfg.min_size_fraction);
  const int limit = int(std::floor(1.2 * cfg.n_superpixels));
  if (seg.count > limit) seg = merge_down(seg, image, std::max(1, limit));
  return seg;
}

}  // namespace grnn
