#include <doctest.h>

#include <random>

#include "grnn/labels.hpp"

using namespace grnn;

namespace {

Segmentation stripes(int h, int w, int n) {
  Segmentation seg;
  seg.height = h;
  seg.width = w;
  seg.count = n;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) seg.assignment.push_back(std::uint32_t(c * n / w));
  return seg;
}

LabelMap make_labels(int h, int w, int c, std::vector<LabelEntry> e) {
  LabelMap l;
  l.height = h;
  l.width = w;
  l.num_classes = c;
  l.entries = std::move(e);
  return l;
}

}  // namespace

TEST_CASE("one_hot") {
  CHECK(one_hot(2, 4) == std::vector<double>{0, 1, 0, 0});
  CHECK(one_hot(1, 1) == std::vector<double>{1});
  CHECK_THROWS_AS(one_hot(5, 4), Error);
  CHECK_THROWS_AS(one_hot(0, 4), Error);
}

TEST_CASE("soft and hard label oracles") {
  const auto seg = stripes(3, 3, 3);  // column k is superpixel k
  SUBCASE("classes 1,1,2 in one superpixel") {
    const auto sl = soft_labels(make_labels(3, 3, 3, {{0, 0, 1}, {1, 0, 1}, {2, 0, 2}}), seg, 3);
    CHECK(sl.soft(0, 0) == 2.0 / 3.0);
    CHECK(sl.soft(0, 1) == 1.0 / 3.0);
    CHECK(sl.soft(0, 2) == 0.0);
    CHECK(sl.hard(0, 0) == 1.0);
    CHECK(sl.hard(0, 1) == 0.0);
    CHECK(sl.labeled[0]);
    CHECK_FALSE(sl.labeled[1]);
    for (int q = 0; q < 3; ++q) CHECK(sl.soft(1, q) == 0.0);
    for (int q = 0; q < 3; ++q) CHECK(sl.hard(1, q) == 0.0);
    CHECK(sl.labeled_count() == 1);
  }
  SUBCASE("single pixel of class 3") {
    const auto sl = soft_labels(make_labels(3, 3, 3, {{1, 2, 3}}), seg, 3);
    CHECK(sl.soft(2, 2) == 1.0);
    CHECK(sl.hard(2, 2) == 1.0);
    CHECK(sl.hard(2, 0) == 0.0);
  }
  SUBCASE("tie goes to the lowest class") {
    const auto sl = soft_labels(make_labels(3, 3, 3, {{0, 1, 2}, {1, 1, 1}}), seg, 3);
    CHECK(sl.soft(1, 0) == 0.5);
    CHECK(sl.hard(1, 0) == 1.0);
    CHECK(sl.hard(1, 1) == 0.0);
  }
}

TEST_CASE("hard_labels is idempotent") {
  const auto seg = stripes(4, 4, 2);
  auto sl = soft_labels(make_labels(4, 4, 2, {{0, 0, 2}, {1, 1, 2}, {0, 3, 1}}), seg, 2);
  const RowMatrix first = sl.hard;
  hard_labels(sl);
  CHECK(sl.hard == first);
  hard_labels(sl);
  CHECK(sl.hard == first);
}

TEST_CASE("argmax ties") {
  const double v[4] = {0.1, 0.4, 0.4, 0.1};
  CHECK(argmax(v, 4) == 1);
  const double z[3] = {0, 0, 0};
  CHECK(argmax(z, 3) == 0);
}

TEST_CASE("random instances match a direct tally") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const int h = 1 + int(rng() % 10), w = 1 + int(rng() % 10), c = 1 + int(rng() % 4);
    const int n = 1 + int(rng() % std::min(w, 4));
    const auto seg = stripes(h, w, n);
    LabelMap l = make_labels(h, w, c, {});
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col)
        if (rng() % 3 == 0) l.entries.push_back({r, col, 1 + int(rng() % c)});
    const auto sl = soft_labels(l, seg, c);

    std::vector<std::vector<int>> tally(n, std::vector<int>(c, 0));
    std::vector<int> total(n, 0);
    for (const auto& e : l.entries) {
      const auto k = seg(e.row, e.col);
      ++tally[k][e.class_id - 1];
      ++total[k];
    }
    for (int k = 0; k < n; ++k) {
      CHECK(bool(sl.labeled[k]) == (total[k] > 0));
      int best = 0;
      for (int q = 0; q < c; ++q) {
        const double expect = total[k] ? double(tally[k][q]) / total[k] : 0.0;
        CHECK(sl.soft(k, q) == expect);
        if (tally[k][q] > tally[k][best]) best = q;
      }
      double soft_sum = 0.0, hard_sum = 0.0;
      for (int q = 0; q < c; ++q) {
        soft_sum += sl.soft(k, q);
        hard_sum += sl.hard(k, q);
        CHECK(sl.hard(k, q) == (total[k] && q == best ? 1.0 : 0.0));
      }
      CHECK(std::abs(soft_sum - (total[k] ? 1.0 : 0.0)) < 1e-12);
      CHECK(hard_sum == (total[k] ? 1.0 : 0.0));
    }
  }
}
