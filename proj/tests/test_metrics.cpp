#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "grnn/metrics.hpp"
#include "oracles.hpp"

using namespace grnn;
using testing::brute_force;

namespace {

// Truth/prediction vectors laid out on a 1 x n map.
std::pair<ClassificationMap, LabelMap> case_of(const std::vector<int>& truth, const std::vector<int>& pred,
                                               int c) {
  const int n = int(truth.size());
  ClassificationMap map(1, n, c);
  map.labels = pred;
  LabelMap t;
  t.height = 1;
  t.width = n;
  t.num_classes = c;
  for (int i = 0; i < n; ++i) t.entries.push_back({0, i, truth[i]});
  return {map, t};
}

}  // namespace

TEST_CASE("perfect prediction") {
  auto [map, truth] = case_of({1, 2, 3, 2}, {1, 2, 3, 2}, 3);
  const auto r = evaluate(map, truth);
  CHECK(r.oa == 1.0);
  CHECK(r.kappa == 1.0);
  CHECK_FALSE(r.kappa_degenerate);
}

TEST_CASE("hand-computed six-pixel case") {
  auto [map, truth] = case_of({1, 1, 1, 2, 2, 2}, {1, 1, 2, 2, 2, 2}, 2);
  const auto r = evaluate(map, truth);
  CHECK(r.oa == 5.0 / 6.0);
  CHECK(std::abs(r.kappa - 2.0 / 3.0) < 1e-15);
  CHECK(r.confusion[0] == std::vector<std::int64_t>{0, 2, 1});
  CHECK(r.confusion[1] == std::vector<std::int64_t>{0, 0, 3});
  CHECK(r.per_class[0] == 2.0 / 3.0);
  CHECK(r.per_class[1] == 1.0);
}

TEST_CASE("single class all correct is degenerate") {
  auto [map, truth] = case_of({1, 1, 1}, {1, 1, 1}, 1);
  const auto r = evaluate(map, truth);
  CHECK(r.kappa == 1.0);
  CHECK(r.kappa_degenerate);
}

TEST_CASE("unclassified predictions count as errors") {
  auto [map, truth] = case_of({1, 2, 2}, {0, 2, 2}, 2);
  const auto r = evaluate(map, truth);
  CHECK(r.oa == 2.0 / 3.0);
  CHECK(r.confusion[0][0] == 1);
  std::int64_t total = 0;
  for (auto& row : r.confusion)
    for (auto v : row) total += v;
  CHECK(total == r.n_test);
}

TEST_CASE("empty truth is an error") {
  ClassificationMap map(1, 1, 1);
  LabelMap truth;
  truth.height = truth.width = 1;
  CHECK_THROWS_AS(evaluate(map, truth), Error);
}

TEST_CASE("random instances match the brute-force recount exactly") {
  std::mt19937_64 rng(123);
  for (int t = 0; t < 100; ++t) {
    const int c = 1 + int(rng() % 5), n = 1 + int(rng() % 60);
    std::vector<int> truth(n), pred(n);
    for (auto& v : truth) v = 1 + int(rng() % c);
    for (int i = 0; i < n; ++i) pred[i] = rng() % 4 == 0 ? truth[i] : int(rng() % (c + 1));
    auto [map, lm] = case_of(truth, pred, c);
    const auto r = evaluate(map, lm);
    const auto [po, kappa] = brute_force(truth, pred);
    CHECK(r.oa == po);
    CHECK(r.kappa == kappa);
  }
}

TEST_CASE("OA is invariant under consistent relabeling") {
  std::mt19937_64 rng(5);
  std::vector<int> truth(40), pred(40);
  for (auto& v : truth) v = 1 + int(rng() % 4);
  for (auto& v : pred) v = 1 + int(rng() % 4);
  const std::vector<int> perm = {0, 3, 1, 4, 2};
  std::vector<int> t2(40), p2(40);
  for (int i = 0; i < 40; ++i) t2[i] = perm[truth[i]], p2[i] = perm[pred[i]];
  auto [m1, l1] = case_of(truth, pred, 4);
  auto [m2, l2] = case_of(t2, p2, 4);
  const auto a = evaluate(m1, l1), b = evaluate(m2, l2);
  CHECK(a.oa == b.oa);
  CHECK(a.kappa == b.kappa);
}

TEST_CASE("report serialization") {
  auto [map, truth] = case_of({1, 1, 1, 2, 2, 2}, {1, 1, 2, 2, 2, 2}, 3);
  const auto r = evaluate(map, truth);
  const auto j = r.to_json();
  CHECK(j["oa"] == r.oa);
  CHECK(j["per_class_accuracy"][2].is_null());
  CHECK(r.to_table().find("OA") != std::string::npos);
}

namespace {

LabelMap pool(const std::vector<int>& class_sizes) {
  LabelMap l;
  l.height = 100;
  l.width = 100;
  l.num_classes = int(class_sizes.size());
  int p = 0;
  for (std::size_t q = 0; q < class_sizes.size(); ++q)
    for (int i = 0; i < class_sizes[q]; ++i, ++p) l.entries.push_back({p / 100, p % 100, int(q) + 1});
  return l;
}

std::map<int, int> counts(const LabelMap& l) {
  std::map<int, int> m;
  for (auto& e : l.entries) ++m[e.class_id];
  return m;
}

}  // namespace

TEST_CASE("split: per-class count") {
  const auto l = pool({30, 12, 50});
  const auto [train, test] = split_labels(l, {std::nullopt, 10}, 1);
  for (auto [q, n] : counts(train)) CHECK(n == 10);
  CHECK(train.size() + test.size() == l.size());
  std::set<std::pair<int, int>> seen;
  for (auto& e : train.entries) seen.insert({e.row, e.col});
  for (auto& e : test.entries) CHECK(seen.insert({e.row, e.col}).second);
  CHECK_THROWS_AS(split_labels(l, {std::nullopt, 13}, 1), Error);
}

TEST_CASE("split: fraction") {
  const auto [train, test] = split_labels(pool({100}), {0.5, std::nullopt}, 3);
  CHECK(train.size() == 50);
  CHECK(test.size() == 50);
  // floor per class, remainder to the largest classes: 0.1 * {25, 17, 8} -> {2, 1, 0} + 2 extra
  const auto [tr2, te2] = split_labels(pool({25, 17, 8}), {0.1, std::nullopt}, 3);
  const auto c2 = counts(tr2);
  CHECK(tr2.size() == 5);
  CHECK(c2.at(1) == 3);
  CHECK(c2.at(2) == 2);
  CHECK(c2.count(3) == 0);
}

TEST_CASE("split: deterministic per seed") {
  const auto l = pool({40, 40, 40});
  const auto a = split_labels(l, {0.3, std::nullopt}, 9);
  const auto b = split_labels(l, {0.3, std::nullopt}, 9);
  const auto c = split_labels(l, {0.3, std::nullopt}, 10);
  CHECK(a.first.entries == b.first.entries);
  CHECK(a.second.entries == b.second.entries);
  CHECK_FALSE(a.first.entries == c.first.entries);
}

TEST_CASE("split: exactly one rule") {
  CHECK_THROWS_AS(split_labels(pool({5}), {}, 0), Error);
  CHECK_THROWS_AS(split_labels(pool({5}), {0.5, 2}, 0), Error);
}
