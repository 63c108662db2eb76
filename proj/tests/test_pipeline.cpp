#include <doctest.h>

#include <cstdlib>
#include <set>

#include "grnn/io.hpp"
#include "grnn/pipeline.hpp"
#include "helpers.hpp"

using namespace grnn;

namespace {

PipelineConfig small_config(const std::filesystem::path& out) {
  auto cfg = preset("synth");
  cfg.synth->height = cfg.synth->width = 32;
  cfg.synth->bands = 16;
  cfg.synth->n_classes = 4;
  cfg.synth->label_fraction = 0.03;
  cfg.slic.n_superpixels = 60;
  cfg.train.hidden1 = cfg.train.hidden2 = 12;
  cfg.train.n_iter = 40;
  cfg.output_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"indian_pines", "french_guiana", "synth"});
  const auto ip = preset("indian_pines");
  CHECK(ip.slic.n_superpixels == 1200);
  CHECK(ip.train.weights.spc == 0.15);
  CHECK(ip.train.weights.graph == 1e5);
  CHECK(ip.train.weights.variance == 2.0);
  CHECK(ip.train.weights.entropy == 20.0);
  CHECK(ip.train.n_iter == 500);
  CHECK(ip.alpha == 0.5);
  CHECK(ip.tau == 0.4);
  CHECK(ip.split.per_class_count == 10);
  const auto fg = preset("french_guiana");
  CHECK(fg.slic.n_superpixels == 5000);
  CHECK(fg.train.weights.spc == 0.1);
  CHECK(fg.train.weights.graph == 0.2);
  CHECK(fg.train.weights.variance == 0.1);
  CHECK(fg.train.weights.entropy == 20.0);
  CHECK(fg.train.n_iter == 400);
  CHECK(fg.alpha == 0.5);
  const auto s = preset("synth");
  REQUIRE(s.synth);
  CHECK(s.synth->height == 64);
  CHECK(s.synth->n_classes == 8);
  CHECK(s.synth->label_fraction == 0.01);
  CHECK_THROWS_AS(preset("nope"), Error);
}

TEST_CASE("config json round trip and overrides") {
  auto cfg = preset("french_guiana");
  cfg.seed = 77;
  cfg.mode = Mode::LabelPropOnly;
  cfg.train.options.graph_term_unweighted = true;
  PipelineConfig back;
  back.merge_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  PipelineConfig over;
  over.merge_json({{"preset", "indian_pines"}, {"alpha", 0.25}, {"graph", {{"n_s", 7}}}});
  CHECK(over.alpha == 0.25);
  CHECK(over.graph.n_s == 7);
  CHECK(over.slic.n_superpixels == 1200);
  // a manifest carries the config under "config"
  PipelineConfig from_manifest;
  from_manifest.merge_json({{"config", cfg.to_json()}, {"seed", 1}});
  CHECK(from_manifest.to_json() == cfg.to_json());
}

TEST_CASE("config validation") {
  auto cfg = preset("synth");
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = preset("synth");
  cfg.tau = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  PipelineConfig empty;
  CHECK_THROWS_AS(empty.validate(), Error);  // no cube and no synth scene
}

TEST_CASE("modes") {
  for (auto m : {Mode::Grnn, Mode::MlpOnly, Mode::LabelPropOnly}) CHECK(parse_mode(to_string(m)) == m);
  CHECK(to_string(Mode::MlpOnly) == "mlp-only");
  CHECK_THROWS_AS(parse_mode("sgl"), Error);
}

TEST_CASE("mean_sd") {
  const auto [m1, s1] = mean_sd({0.9});
  CHECK(m1 == 0.9);
  CHECK(s1 == 0.0);
  const auto [m, s] = mean_sd({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(std::abs(s - std::sqrt(5.0 / 3.0)) < 1e-15);
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("synth run writes every artifact") {
  testing::TempDir dir("pipe");
  const auto cfg = small_config(dir.path);
  const auto run = run_pipeline(cfg);
  for (const char* f : {"map.ppm", "segments.ppm", "report.json", "report.txt", "loss_history.csv", "t_star.csv",
                        "model.json", "model.raw", "train_labels.csv", "test_labels.csv", "manifest.json"}) {
    INFO(f);
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(run.report.oa > 0.5);
  const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest["seed"] == 0);
  // the map is constant inside every superpixel
  const auto scene_map = run.result.map;
  CHECK(scene_map.labels.size() == 32u * 32u);
  CHECK(run.report_json["mode"] == "grnn");
}

TEST_CASE("modes produce their own maps") {
  testing::TempDir dir("pipe");
  auto cfg = small_config(dir.path);
  cfg.cache = false;
  const auto scene = generate([&] {
    auto s = *cfg.synth;
    s.seed = 0;
    return s;
  }());
  const auto prepared = prepare(scene.cube, cfg);
  std::set<std::uint32_t> ids(prepared.seg.assignment.begin(), prepared.seg.assignment.end());
  CHECK(int(ids.size()) == prepared.seg.count);
  for (auto m : {Mode::Grnn, Mode::MlpOnly, Mode::LabelPropOnly}) {
    cfg.mode = m;
    const auto c = classify(prepared, scene.sparse, 4, cfg, 0);
    INFO(to_string(m));
    CHECK(c.map.labels.size() == scene.cube.pixels());
    CHECK((m == Mode::MlpOnly) == (c.t_star.size() == 0));
    CHECK((m == Mode::LabelPropOnly) == c.history.empty());
    if (m != Mode::MlpOnly) {
      std::vector<int> sp_class(prepared.seg.count, -1);
      for (std::size_t p = 0; p < c.map.labels.size(); ++p) {
        auto& v = sp_class[prepared.seg.assignment[p]];
        if (v < 0) v = c.map.labels[p];
        CHECK(v == c.map.labels[p]);
      }
    }
  }
}

TEST_CASE("trials are deterministic") {
  testing::TempDir dir("pipe");
  auto cfg = small_config(dir.path);
  const auto a = run_trials(cfg, 2, 5);
  const auto b = run_trials(cfg, 2, 5);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.reports.size() == 2);
  const auto one = run_trials(cfg, 1, 5);
  CHECK(one.oa_sd == 0.0);
  CHECK(one.oa_mean == a.reports[0].oa);
}

TEST_CASE("output dir override and cached rerun") {
  testing::TempDir dir("pipe");
  auto cfg = small_config(dir / "ignored");
  ::setenv("GRNN_OUTPUT_DIR", (dir / "env").c_str(), 1);
  const auto first = run_pipeline(cfg, Exec::Serial);
  const auto bytes = io::read_text(dir / "env" / "report.json");
  const auto second = run_pipeline(cfg, Exec::Serial);  // served from the cache
  ::unsetenv("GRNN_OUTPUT_DIR");
  CHECK(std::filesystem::exists(dir / "env" / "report.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "ignored" / "report.json"));
  CHECK(io::read_text(dir / "env" / "report.json") == bytes);
  CHECK(first.report_json == second.report_json);
}

TEST_CASE("stage errors name the stage") {
  testing::TempDir dir("pipe");
  auto cfg = small_config(dir.path);
  cfg.slic.n_superpixels = 5000;  // more superpixels than pixels
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("segment"), Error);
  cfg = small_config(dir.path);
  cfg.synth.reset();
  cfg.cube = dir / "missing.json";
  CHECK_THROWS_AS(run_pipeline(cfg), Error);
}
