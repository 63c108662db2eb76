#include <doctest.h>

#include <cmath>
#include <limits>

#include "gradcheck.hpp"

using namespace grnn;

TEST_CASE("gradient matches central differences on the b=3 h=4 c=2 instance") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto t = testing::tiny_instance(seed, 3, 4, 4, 2, 2, 2, 3);
    Objective obj(t->pixels, t->seg, t->graph, t->train, 2, t->weights);
    const auto r = testing::check_gradient(obj, t->params);
    INFO("seed ", seed);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("unweighted graph term gradient") {
  auto t = testing::tiny_instance(9, 3, 4, 4, 3, 3, 3, 3);
  Objective obj(t->pixels, t->seg, t->graph, t->train, 3, t->weights, {true});
  CHECK(testing::check_gradient(obj, t->params).max_rel_error < 1e-4);
  Objective weighted(t->pixels, t->seg, t->graph, t->train, 3, t->weights);
  CHECK(obj.loss(t->params).graph != weighted.loss(t->params).graph);
}

TEST_CASE("each term alone has a correct gradient") {
  auto t = testing::tiny_instance(4, 3, 5, 4, 3, 3, 3, 4);
  for (int term = 0; term < 4; ++term) {
    LossWeights w;
    (term == 0 ? w.spc : term == 1 ? w.graph : term == 2 ? w.variance : w.entropy) = 1.5;
    Objective obj(t->pixels, t->seg, t->graph, t->train, 3, w);
    INFO("term ", term);
    CHECK(testing::check_gradient(obj, t->params).max_rel_error < 1e-4);
  }
}

TEST_CASE("all weights zero leaves only the pixel cross-entropy") {
  auto t = testing::tiny_instance(2, 3, 4, 4, 2, 2, 2, 3, false);
  Objective obj(t->pixels, t->seg, t->graph, t->train, 2, LossWeights{});
  const auto l = obj.loss(t->params);
  CHECK(l.superpixel == 0.0);
  CHECK(l.graph == 0.0);
  CHECK(l.variance == 0.0);
  CHECK(l.entropy == 0.0);
  const RowMatrix p = predict(t->params, t->pixels);
  double ce = 0.0;
  for (const auto& e : t->train.entries) ce -= std::log(p(e.row * 3 + e.col, e.class_id - 1));
  CHECK(std::abs(l.pixel - ce) < 1e-12);
  CHECK(l.total == l.pixel);
}

namespace {

// Zeroes every weight so the network outputs the uniform distribution.
MlpParams uniform_params(MlpParams p) {
  std::fill(p.theta.begin(), p.theta.end(), 0.0);
  return p;
}

}  // namespace

TEST_CASE("uniform prediction: entropy term and its stationarity") {
  auto t = testing::tiny_instance(3, 3, 4, 4, 3, 2, 2, 3, false);
  LossWeights w;
  w.entropy = 2.5;
  Objective obj(t->pixels, t->seg, t->graph, t->train, 3, w);
  const auto p = uniform_params(t->params);
  const auto l = obj.loss(p);
  CHECK(std::abs(l.entropy + 2.5 * std::log(3.0)) < 1e-12);
  // with all weights zero, the entropy term's gradient alone must vanish
  LossWeights only_entropy = w;
  LabelMap none = t->train;
  none.entries.clear();
  Objective ent(t->pixels, t->seg, t->graph, none, 3, only_entropy);
  std::vector<double> g;
  ent.loss_and_gradient(p, g);
  for (double v : g) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("graph and variance terms vanish for identical outputs") {
  auto t = testing::tiny_instance(6, 3, 4, 4, 2, 2, 2, 3, false);
  LossWeights w;
  w.variance = 3.0;
  Objective obj(t->pixels, t->seg, t->graph, t->train, 2, w);
  CHECK(obj.loss(uniform_params(t->params)).variance == 0.0);
  // two nodes with a single edge have equal degree, so identical phi gives zero energy
  REQUIRE(t->graph.n == 2);
  LossWeights wg;
  wg.graph = 5.0;
  Objective g(t->pixels, t->seg, t->graph, t->train, 2, wg);
  CHECK(std::abs(g.loss(uniform_params(t->params)).graph) < 1e-15);
}

TEST_CASE("saturated correct predictions give a near-zero gradient") {
  // One input, class decided by the sign of x; huge weights saturate the softmax.
  RowMatrix x(4, 1);
  x << 1.0, 2.0, -1.0, -2.0;
  Segmentation seg;
  seg.height = 2;
  seg.width = 2;
  seg.count = 2;
  seg.assignment = {0, 0, 1, 1};
  SuperpixelGraph graph;
  graph.n = 2;
  graph.edges = {{{1, 1.0}}, {{0, 1.0}}};
  graph.degrees = {1.0, 1.0};
  LabelMap train;
  train.height = train.width = 2;
  train.num_classes = 2;
  train.entries = {{0, 0, 1}, {0, 1, 1}, {1, 0, 2}, {1, 1, 2}};
  auto p = init_mlp({1, 1, 1, 2}, 0);
  const MlpLayout lay(p.shape);
  std::fill(p.theta.begin(), p.theta.end(), 0.0);
  p.theta[lay.w1] = 1.0;        // h1 = x (for x > 0), 0.1 x otherwise
  p.theta[lay.w2] = 1.0;        // h2 = h1
  p.theta[lay.w3] = 1e5;        // class 1 logit
  p.theta[lay.w3 + 1] = -1e5;   // class 2 logit
  Objective obj(x, seg, graph, train, 2, LossWeights{});
  std::vector<double> g;
  obj.loss_and_gradient(p, g);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("non-finite loss raises a numerical error naming the term") {
  auto t = testing::tiny_instance(8, 3, 4, 4, 2, 2, 2, 3);
  t->params.theta[0] = std::numeric_limits<double>::quiet_NaN();
  Objective obj(t->pixels, t->seg, t->graph, t->train, 2, t->weights);
  CHECK_THROWS_AS(obj.loss(t->params), NumericalError);
  std::vector<double> g;
  CHECK_THROWS_WITH_AS(obj.loss_and_gradient(t->params, g), doctest::Contains("term"), NumericalError);
}

TEST_CASE("serial and parallel evaluation agree") {
  auto t = testing::tiny_instance(12, 4, 6, 5, 3, 3, 6, 6);
  Objective obj(t->pixels, t->seg, t->graph, t->train, 3, t->weights);
  std::vector<double> gs, gp;
  const auto ls = obj.loss_and_gradient(t->params, gs, Exec::Serial);
  const auto lp = obj.loss_and_gradient(t->params, gp, Exec::Parallel);
  CHECK(std::abs(ls.total - lp.total) <= 1e-10 * std::max(1.0, std::abs(ls.total)));
  for (std::size_t i = 0; i < gs.size(); ++i) CHECK(std::abs(gs[i] - gp[i]) < 1e-10);
}

TEST_CASE("superpixel_prediction") {
  Segmentation seg;
  seg.height = 1;
  seg.width = 3;
  seg.count = 2;
  seg.assignment = {0, 0, 1};
  RowMatrix p(3, 2);
  p << 1, 0, 0, 1, 0.3, 0.7;
  const auto phi = superpixel_prediction(p, seg);
  CHECK(phi(0, 0) == 0.5);
  CHECK(phi(0, 1) == 0.5);
  CHECK(phi(1, 0) == 0.3);
  CHECK(phi(1, 1) == 0.7);
}
