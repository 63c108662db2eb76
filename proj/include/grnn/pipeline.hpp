#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grnn/graph.hpp"
#include "grnn/metrics.hpp"
#include "grnn/pca.hpp"
#include "grnn/propagate.hpp"
#include "grnn/slic.hpp"
#include "grnn/synth.hpp"
#include "grnn/train.hpp"

namespace grnn {

enum class Mode {
  Grnn,           // graph-regularized NN, confident-label augmentation, propagation
  MlpOnly,        // plain cross-entropy NN, per-pixel argmax map
  LabelPropOnly,  // propagation from the ground-truth labels alone
};

std::string to_string(Mode mode);
Mode parse_mode(const std::string& name);

struct PipelineConfig {
  std::filesystem::path cube;
  std::filesystem::path labels;
  /// Held-out truth. When empty, `labels` is split according to `split`.
  std::filesystem::path test_labels;
  std::filesystem::path output_dir = "grnn_out";

  Mode mode = Mode::Grnn;
  std::uint64_t seed = 0;
  PcaConfig pca;
  SlicConfig slic;
  GraphConfig graph;
  TrainConfig train;
  double tau = 0.4;
  double alpha = 0.5;
  SplitSpec split;
  /// Scene generated in-process when `cube` is empty; its seed follows the run seed.
  std::optional<SynthConfig> synth;
  bool cache = true;

  void validate() const;
  nlohmann::json to_json() const;
  /// Applies the keys present in `j` on top of *this (a "preset" key is applied first).
  void merge_json(const nlohmann::json& j);
};

/// "indian_pines", "french_guiana" or "synth".
PipelineConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Seed-independent stages: PCA, first-component image, SLIC, graph.
struct PreparedScene {
  PcaModel pca;
  FeatureCube reduced;
  RowMatrix pixels;
  Image first_component;
  Segmentation seg;
  SuperpixelGraph graph;
};

PreparedScene prepare(const HsiCube& cube, const PipelineConfig& cfg, Exec exec = Exec::Parallel);

struct Classification {
  ClassificationMap map;
  RowMatrix t_star;                     // empty in mlp-only mode
  std::vector<LossBreakdown> history;   // empty in labelprop-only mode
  std::optional<MlpParams> params;
  std::size_t confident_pixels = 0;
  std::size_t augmented_pixels = 0;
};

/// Seed-dependent stages: training, augmentation, propagation, labeling.
Classification classify(const PreparedScene& scene, const LabelMap& train, int num_classes,
                        const PipelineConfig& cfg, std::uint64_t seed, Exec exec = Exec::Parallel);

struct PipelineRun {
  EvalReport report;
  Classification result;
  LabelMap train;
  LabelMap test;
  nlohmann::json report_json;
};

/// Runs every stage from files on disk and writes map.ppm, report.json,
/// report.txt, loss_history.csv, t_star.csv, segments.ppm and manifest.json
/// to the output directory (GRNN_OUTPUT_DIR overrides it).
PipelineRun run_pipeline(const PipelineConfig& cfg, Exec exec = Exec::Parallel);

struct TrialsSummary {
  std::vector<EvalReport> reports;
  double oa_mean = 0.0, oa_sd = 0.0;
  double kappa_mean = 0.0, kappa_sd = 0.0;

  nlohmann::json to_json() const;
};

/// Sample mean and standard deviation (n - 1); SD is 0 for a single value.
std::pair<double, double> mean_sd(const std::vector<double>& values);

/// n_trials runs with seeds base_seed + i (split and initialization); shared
/// preprocessing is computed once.
TrialsSummary run_trials(const PipelineConfig& cfg, int n_trials, std::uint64_t base_seed,
                         Exec exec = Exec::Parallel);

/// 64-bit FNV-1a, used for content-addressed cache names.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);
std::string hex(std::uint64_t v);

std::filesystem::path resolve_output_dir(const PipelineConfig& cfg);

}  // namespace grnn
