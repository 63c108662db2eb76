#include "grnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

namespace grnn {

double cohen_kappa(std::int64_t n, std::int64_t agreements, std::int64_t chance_products) {
  const std::int64_t denom = n * n - chance_products;
  if (denom == 0) return 1.0;
  return double(n * agreements - chance_products) / double(denom);
}

EvalReport evaluate(const ClassificationMap& pred, const LabelMap& truth) {
  if (truth.entries.empty()) throw Error("evaluate: empty truth set");
  if (pred.height != truth.height || pred.width != truth.width) {
    throw Error("evaluate: prediction and truth shapes differ");
  }
  EvalReport r;
  r.num_classes = std::max(truth.num_classes, pred.num_classes);
  for (const auto& e : truth.entries) r.num_classes = std::max(r.num_classes, e.class_id);
  const int c = r.num_classes;
  r.confusion.assign(c, std::vector<std::int64_t>(c + 1, 0));
  for (const auto& e : truth.entries) {
    const int p = pred(e.row, e.col);
    if (p < 0 || p > c) throw Error("evaluate: predicted label out of range");
    ++r.confusion[e.class_id - 1][p];
  }
  r.n_test = std::int64_t(truth.entries.size());

  std::int64_t agreements = 0, chance = 0;
  std::vector<std::int64_t> row_sum(c, 0), col_sum(c + 1, 0);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j <= c; ++j) {
      row_sum[i] += r.confusion[i][j];
      col_sum[j] += r.confusion[i][j];
    }
    agreements += r.confusion[i][i + 1];
  }
  for (int i = 0; i < c; ++i) chance += row_sum[i] * col_sum[i + 1];
  r.oa = double(agreements) / double(r.n_test);
  r.kappa_degenerate = r.n_test * r.n_test == chance;
  r.kappa = cohen_kappa(r.n_test, agreements, chance);
  r.per_class.resize(c);
  for (int i = 0; i < c; ++i) {
    r.per_class[i] = row_sum[i] ? double(r.confusion[i][i + 1]) / double(row_sum[i])
                                : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (double v : per_class) per.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
  return {{"num_classes", num_classes}, {"n_test", n_test},
          {"oa", oa},                   {"kappa", kappa},
          {"kappa_degenerate", kappa_degenerate},
          {"per_class_accuracy", per},  {"confusion", confusion}};
}

std::string EvalReport::to_table() const {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "test pixels  %lld\nOA           %.4f\nkappa        %.4f%s\n",
                static_cast<long long>(n_test), oa, kappa,
                kappa_degenerate ? "  (degenerate: chance agreement 1)" : "");
  out += buf;
  out += "class  recall    support\n";
  for (int i = 0; i < num_classes; ++i) {
    std::int64_t support = 0;
    for (auto v : confusion[i]) support += v;
    std::snprintf(buf, sizeof buf, "%5d  %-8.4f  %lld\n", i + 1, per_class[i],
                  static_cast<long long>(support));
    out += buf;
  }
  return out;
}

std::pair<LabelMap, LabelMap> split_labels(const LabelMap& labels, const SplitSpec& spec,
                                           std::uint64_t seed) {
  if (spec.train_fraction.has_value() == spec.per_class_count.has_value()) {
    throw Error("split: give exactly one of train_fraction or per_class_count");
  }
  std::map<int, std::vector<LabelEntry>> by_class;
  for (const auto& e : labels.entries) by_class[e.class_id].push_back(e);

  std::map<int, std::size_t> take;
  if (spec.per_class_count) {
    const int k = *spec.per_class_count;
    if (k < 0) throw Error("split: per_class_count must be >= 0");
    for (const auto& [q, v] : by_class) {
      if (v.size() < std::size_t(k)) {
        throw Error("split: class " + std::to_string(q) + " has " + std::to_string(v.size()) +
                    " labeled pixels, fewer than " + std::to_string(k));
      }
      take[q] = std::size_t(k);
    }
  } else {
    const double f = *spec.train_fraction;
    if (!(f >= 0.0 && f <= 1.0)) throw Error("split: train_fraction must lie in [0, 1]");
    std::size_t assigned = 0;
    for (const auto& [q, v] : by_class) {
      take[q] = std::size_t(std::floor(f * double(v.size())));
      assigned += take[q];
    }
    const auto target = std::size_t(std::llround(f * double(labels.entries.size())));
    std::vector<int> largest;
    for (const auto& [q, v] : by_class) largest.push_back(q);
    std::stable_sort(largest.begin(), largest.end(),
                     [&](int a, int b) { return by_class[a].size() > by_class[b].size(); });
    for (std::size_t i = 0; assigned < target && i < largest.size(); ++i) {
      const int q = largest[i];
      if (take[q] < by_class[q].size()) ++take[q], ++assigned;
    }
  }

  std::mt19937_64 rng(seed);
  LabelMap train, test;
  for (auto* m : {&train, &test}) {
    m->height = labels.height;
    m->width = labels.width;
    m->num_classes = labels.num_classes;
  }
  for (auto& [q, v] : by_class) {
    std::shuffle(v.begin(), v.end(), rng);
    train.entries.insert(train.entries.end(), v.begin(), v.begin() + std::ptrdiff_t(take[q]));
    test.entries.insert(test.entries.end(), v.begin() + std::ptrdiff_t(take[q]), v.end());
  }
  auto raster = [](const LabelEntry& a, const LabelEntry& b) {
    return std::pair(a.row, a.col) < std::pair(b.row, b.col);
  };
  std::sort(train.entries.begin(), train.entries.end(), raster);
  std::sort(test.entries.begin(), test.entries.end(), raster);
  return {train, test};
}

}  // namespace grnn
