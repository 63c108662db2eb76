#include "grnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace grnn {

namespace {

// Baseline plus 3-5 Gaussian bumps over the band axis.
std::vector<double> smooth_spectrum(int bands, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_bumps(3, 5);
  std::uniform_real_distribution<double> amplitude(0.05, 0.4);
  std::uniform_real_distribution<double> center(0.0, bands - 1.0);
  std::uniform_real_distribution<double> width(std::max(1.0, bands / 12.0), std::max(1.5, bands / 4.0));
  std::uniform_real_distribution<double> baseline(0.02, 0.1);
  std::vector<double> s(bands, baseline(rng));
  const int n = n_bumps(rng);
  for (int i = 0; i < n; ++i) {
    const double a = amplitude(rng), mu = center(rng), w = width(rng);
    for (int b = 0; b < bands; ++b) s[b] += a * std::exp(-0.5 * (b - mu) * (b - mu) / (w * w));
  }
  return s;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

void SynthConfig::validate() const {
  if (height < 1 || width < 1 || bands < 1) throw Error("synth: dimensions must be positive");
  if (n_classes < 2) throw Error("synth: need at least two classes");
  if (crowns_per_class < 1) throw Error("synth: crowns_per_class must be >= 1");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) {
    throw Error("synth: label_fraction must lie in (0, 1]");
  }
  if (noise_sigma < 0.0) throw Error("synth: noise_sigma must be >= 0");
  if (std::int64_t(n_classes) * crowns_per_class > std::int64_t(height) * width) {
    throw Error("synth: more crowns than pixels");
  }
}

SynthScene generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SynthScene scene;

  constexpr int kAttempts = 1000;
  for (int q = 0; q < cfg.n_classes; ++q) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      auto s = smooth_spectrum(cfg.bands, rng);
      placed = std::all_of(scene.signatures.begin(), scene.signatures.end(), [&](const auto& o) {
        return distance(s, o) >= cfg.spectral_separation;
      });
      if (placed) scene.signatures.push_back(std::move(s));
    }
    if (!placed) {
      throw Error("synth: could not reach spectral separation " +
                  std::to_string(cfg.spectral_separation) + " for class " + std::to_string(q + 1));
    }
  }

  // Crown sites; every class owns crowns_per_class of them.
  const int n_sites = cfg.n_classes * cfg.crowns_per_class;
  std::vector<int> site_class(n_sites);
  for (int i = 0; i < n_sites; ++i) site_class[i] = i % cfg.n_classes;
  std::shuffle(site_class.begin(), site_class.end(), rng);
  std::uniform_real_distribution<double> ur(0.0, cfg.height), uc(0.0, cfg.width);
  std::vector<std::pair<double, double>> sites(n_sites);
  for (auto& s : sites) s = {ur(rng), uc(rng)};

  std::vector<int> pixel_class(std::size_t(cfg.height) * cfg.width);
  scene.crown.resize(pixel_class.size());
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      double best = std::numeric_limits<double>::infinity();
      int owner = 0;
      for (int i = 0; i < n_sites; ++i) {
        const double dr = r + 0.5 - sites[i].first, dc = c + 0.5 - sites[i].second;
        const double d = dr * dr + dc * dc;
        if (d < best) best = d, owner = i;
      }
      pixel_class[std::size_t(r) * cfg.width + c] = site_class[owner];
      scene.crown[std::size_t(r) * cfg.width + c] = owner;
    }
  }

  scene.noise_sigma = cfg.noise_sigma;
  if (cfg.snr_db > 0.0) {
    double power = 0.0;
    for (int cls : pixel_class) {
      for (double v : scene.signatures[cls]) power += v * v;
    }
    power /= double(pixel_class.size()) * cfg.bands;
    scene.noise_sigma = std::sqrt(power / std::pow(10.0, cfg.snr_db / 10.0));
  }

  scene.cube = HsiCube(cfg.height, cfg.width, cfg.bands);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t p = 0; p < pixel_class.size(); ++p) {
    const auto& s = scene.signatures[pixel_class[p]];
    float* x = scene.cube.pixel(p);
    for (int b = 0; b < cfg.bands; ++b) {
      const double eps = scene.noise_sigma > 0.0 ? scene.noise_sigma * noise(rng) : 0.0;
      x[b] = float(s[b] + eps);
    }
  }

  for (auto* m : {&scene.truth, &scene.sparse}) {
    m->height = cfg.height;
    m->width = cfg.width;
    m->num_classes = cfg.n_classes;
  }
  std::vector<std::vector<LabelEntry>> by_class(cfg.n_classes);
  for (std::size_t p = 0; p < pixel_class.size(); ++p) {
    const LabelEntry e{int(p / cfg.width), int(p % cfg.width), pixel_class[p] + 1};
    scene.truth.entries.push_back(e);
    by_class[pixel_class[p]].push_back(e);
  }
  for (auto& members : by_class) {
    if (members.empty()) continue;
    const auto take = std::clamp<std::size_t>(
        std::size_t(std::llround(cfg.label_fraction * double(members.size()))), 1, members.size());
    std::shuffle(members.begin(), members.end(), rng);
    scene.sparse.entries.insert(scene.sparse.entries.end(), members.begin(),
                                members.begin() + std::ptrdiff_t(take));
  }
  std::sort(scene.sparse.entries.begin(), scene.sparse.entries.end(),
            [](const LabelEntry& a, const LabelEntry& b) {
              return std::pair(a.row, a.col) < std::pair(b.row, b.col);
            });
  return scene;
}

ClassificationMap nearest_signature_map(const HsiCube& cube,
                                        const std::vector<std::vector<double>>& signatures) {
  ClassificationMap map(cube.height, cube.width, int(signatures.size()));
  for (std::size_t p = 0; p < cube.pixels(); ++p) {
    const float* x = cube.pixel(p);
    double best = std::numeric_limits<double>::infinity();
    int owner = 0;
    for (std::size_t q = 0; q < signatures.size(); ++q) {
      double d = 0.0;
      for (int b = 0; b < cube.bands; ++b) d += (x[b] - signatures[q][b]) * (x[b] - signatures[q][b]);
      if (d < best) best = d, owner = int(q);
    }
    map.labels[p] = owner + 1;
  }
  return map;
}

}  // namespace grnn
