#include "grnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "grnn/io.hpp"
#include "grnn/kernels.hpp"

namespace grnn {

void GraphConfig::validate() const {
  if (!(h > 0.0)) throw Error("graph: h must be > 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("graph: beta must lie in [0, 1]");
  if (!(sigma_s > 0.0)) throw Error("graph: sigma_s must be > 0");
  if (!(sigma_l > 0.0)) throw Error("graph: sigma_l must be > 0");
  if (connectivity != 4 && connectivity != 8) throw Error("graph: connectivity must be 4 or 8");
  if (n_s < 1) throw Error("graph: n_s must be >= 1");
}

double SuperpixelGraph::weight(int k, int l) const {
  const auto& row = edges[k];
  auto it = std::lower_bound(row.begin(), row.end(), std::uint32_t(l),
                             [](const GraphEdge& e, std::uint32_t v) { return e.node < v; });
  return it != row.end() && it->node == std::uint32_t(l) ? it->weight : 0.0;
}

std::size_t SuperpixelGraph::nonzeros() const {
  std::size_t n = 0;
  for (const auto& row : edges) n += row.size();
  return n;
}

Eigen::SparseMatrix<double> SuperpixelGraph::adjacency() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nonzeros());
  for (int k = 0; k < n; ++k) {
    for (const auto& e : edges[k]) triplets.emplace_back(k, int(e.node), e.weight);
  }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

RowMatrix extract_features(const FeatureCube& cube, const Segmentation& seg) {
  if (cube.height != seg.height || cube.width != seg.width) {
    throw Error("graph: cube and segmentation shapes differ");
  }
  const int b = cube.bands;
  RowMatrix f = RowMatrix::Zero(seg.count, b + 2);
  // Spectra are accumulated relative to each superpixel's first pixel, so a
  // superpixel of identical pixels gets that spectrum back exactly.
  std::vector<std::size_t> first(seg.count, seg.pixels());
  std::vector<double> count(seg.count, 0.0);
  for (std::size_t p = 0; p < seg.pixels(); ++p) {
    const auto k = seg.assignment[p];
    if (first[k] == seg.pixels()) first[k] = p;
    const double* x = cube.pixel(p);
    const double* x0 = cube.pixel(first[k]);
    for (int j = 0; j < b; ++j) f(k, j) += x[j] - x0[j];
    f(k, b) += double(p / seg.width);
    f(k, b + 1) += double(p % seg.width);
    count[k] += 1.0;
  }
  for (int k = 0; k < seg.count; ++k) {
    f.row(k) /= count[k];
    const double* x0 = cube.pixel(first[k]);
    for (int j = 0; j < b; ++j) f(k, j) += x0[j];
    f(k, b) /= seg.height;
    f(k, b + 1) /= seg.width;
  }
  return f;
}

std::vector<std::vector<std::uint32_t>> superpixel_neighbors(const Segmentation& seg,
                                                             int connectivity) {
  std::vector<std::vector<std::uint32_t>> out(seg.count);
  auto link = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    out[a].push_back(b);
    out[b].push_back(a);
  };
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) {
      const auto a = seg(r, c);
      if (c + 1 < seg.width) link(a, seg(r, c + 1));
      if (r + 1 < seg.height) link(a, seg(r + 1, c));
      if (connectivity == 8 && r + 1 < seg.height) {
        if (c + 1 < seg.width) link(a, seg(r + 1, c + 1));
        if (c > 0) link(a, seg(r + 1, c - 1));
      }
    }
  }
  for (auto& row : out) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return out;
}

double pair_weight(const double* a, const double* b, int spectral_dims, const GraphConfig& cfg) {
  double spec = 0.0;
  for (int i = 0; i < spectral_dims; ++i) {
    const double d = a[i] - b[i];
    spec += d * d;
  }
  const double dr = a[spectral_dims] - b[spectral_dims];
  const double dc = a[spectral_dims + 1] - b[spectral_dims + 1];
  const double spat = dr * dr + dc * dc;
  const double exponent = cfg.beta * spec / (cfg.sigma_s * cfg.sigma_s) +
                          (1.0 - cfg.beta) * spat / (cfg.sigma_l * cfg.sigma_l);
  return std::exp(-exponent / cfg.h);
}

SuperpixelGraph build_adjacency(const RowMatrix& features, int spectral_dims,
                                const std::vector<std::vector<std::uint32_t>>& neighbors,
                                const GraphConfig& cfg, Exec exec) {
  cfg.validate();
  const int n = int(features.rows());
  if (n < 2) throw Error("graph: at least two superpixels are required");
  if (features.cols() != spectral_dims + 2) throw Error("graph: feature width mismatch");
  if (neighbors.size() != std::size_t(n)) throw Error("graph: neighbor list size mismatch");

  const auto rows = exec == Exec::Serial
                        ? kernels::ref::graph_rows(features, spectral_dims, neighbors, cfg)
                        : kernels::omp::graph_rows(features, spectral_dims, neighbors, cfg);

  std::vector<std::map<std::uint32_t, double>> sym(n);
  for (int k = 0; k < n; ++k) {
    for (const auto& e : rows[k]) {
      auto& a = sym[k][e.node];
      a = std::max(a, e.weight);
      auto& b = sym[e.node][std::uint32_t(k)];
      b = std::max(b, e.weight);
    }
  }

  // Isolated nodes (every candidate weight underflowed) are tied to their most
  // similar node; the weight is floored so the degree stays positive.
  for (int k = 0; k < n; ++k) {
    if (!sym[k].empty()) continue;
    int best = -1;
    double best_w = -1.0;
    for (int l = 0; l < n; ++l) {
      if (l == k) continue;
      const double w =
          pair_weight(features.row(k).data(), features.row(l).data(), spectral_dims, cfg);
      if (w > best_w) best_w = w, best = l;
    }
    const double w = std::max(best_w, std::numeric_limits<double>::min());
    sym[k][std::uint32_t(best)] = std::max(sym[k][std::uint32_t(best)], w);
    sym[best][std::uint32_t(k)] = std::max(sym[best][std::uint32_t(k)], w);
  }

  SuperpixelGraph g;
  g.n = n;
  g.spectral_dims = spectral_dims;
  g.features = features;
  g.edges.resize(n);
  g.degrees.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    for (const auto& [l, w] : sym[k]) {
      g.edges[k].push_back({l, w});
      g.degrees[k] += w;
    }
  }
  return g;
}

SuperpixelGraph build_graph(const FeatureCube& cube, const Segmentation& seg,
                            const GraphConfig& cfg, Exec exec) {
  cfg.validate();
  return build_adjacency(extract_features(cube, seg), cube.bands,
                         superpixel_neighbors(seg, cfg.connectivity), cfg, exec);
}

Eigen::SparseMatrix<double> normalized_adjacency(const SuperpixelGraph& graph) {
  std::vector<double> inv_sqrt(graph.n);
  for (int k = 0; k < graph.n; ++k) {
    if (!(graph.degrees[k] > 0.0)) {
      throw Error("graph: node " + std::to_string(k) + " has zero degree");
    }
    inv_sqrt[k] = 1.0 / std::sqrt(graph.degrees[k]);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.nonzeros());
  for (int k = 0; k < graph.n; ++k) {
    for (const auto& e : graph.edges[k]) {
      triplets.emplace_back(k, int(e.node), e.weight * inv_sqrt[k] * inv_sqrt[e.node]);
    }
  }
  Eigen::SparseMatrix<double> s(graph.n, graph.n);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

void save_graph(const SuperpixelGraph& graph, const std::filesystem::path& path) {
  std::string out = "# nodes=" + std::to_string(graph.n) + "\n";
  char buf[96];
  for (int k = 0; k < graph.n; ++k) {
    for (const auto& e : graph.edges[k]) {
      std::snprintf(buf, sizeof buf, "%d,%u,%.17g\n", k, e.node, e.weight);
      out += buf;
    }
  }
  io::write_text(path, out);
}

SuperpixelGraph load_graph(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  SuperpixelGraph g;
  std::vector<std::tuple<int, std::uint32_t, double>> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# nodes=", 0) == 0) {
      g.n = std::stoi(line.substr(8));
      continue;
    }
    int k;
    unsigned l;
    double w;
    if (std::sscanf(line.c_str(), "%d,%u,%lf", &k, &l, &w) != 3) {
      throw Error("graph: malformed line '" + line + "'");
    }
    entries.emplace_back(k, l, w);
  }
  g.edges.resize(g.n);
  g.degrees.assign(g.n, 0.0);
  for (const auto& [k, l, w] : entries) {
    if (k < 0 || k >= g.n || l >= std::uint32_t(g.n)) throw Error("graph: node index out of range");
    g.edges[k].push_back({l, w});
    g.degrees[k] += w;
  }
  for (auto& row : g.edges) {
    std::sort(row.begin(), row.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return a.node < b.node; });
  }
  return g;
}

}  // namespace grnn
