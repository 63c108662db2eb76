#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "grnn/core.hpp"

namespace grnn {

struct EvalReport {
  int num_classes = 0;
  /// Rows are true classes 1..c; column 0 counts unclassified predictions,
  /// columns 1..c the predicted classes.
  std::vector<std::vector<std::int64_t>> confusion;
  double oa = 0.0;
  double kappa = 0.0;
  bool kappa_degenerate = false;  // chance agreement was 1; kappa reported as 1
  std::vector<double> per_class;  // recall; NaN for classes absent from the truth
  std::int64_t n_test = 0;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// Scores a map against held-out truth pixels.
EvalReport evaluate(const ClassificationMap& pred, const LabelMap& truth);

/// kappa = (p_o - p_e) / (1 - p_e) evaluated from integer counts.
double cohen_kappa(std::int64_t n, std::int64_t agreements, std::int64_t chance_products);

struct SplitSpec {
  std::optional<double> train_fraction;
  std::optional<int> per_class_count;
};

/// Stratified, seeded split into disjoint (train, test) label maps.
std::pair<LabelMap, LabelMap> split_labels(const LabelMap& labels, const SplitSpec& spec,
                                           std::uint64_t seed);

}  // namespace grnn
