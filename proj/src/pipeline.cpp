#include "grnn/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <utility>

#include "grnn/io.hpp"
#include "grnn/labels.hpp"

namespace grnn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Grnn: return "grnn";
    case Mode::MlpOnly: return "mlp-only";
    case Mode::LabelPropOnly: return "labelprop-only";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "grnn") return Mode::Grnn;
  if (name == "mlp-only") return Mode::MlpOnly;
  if (name == "labelprop-only") return Mode::LabelPropOnly;
  throw Error("unknown mode '" + name + "' (expected grnn, mlp-only or labelprop-only)");
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

// Runs one stage, prefixing any error with the stage name.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

template <class T>
void read_if(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

json synth_json(const SynthConfig& s) {
  return {{"height", s.height},
          {"width", s.width},
          {"bands", s.bands},
          {"n_classes", s.n_classes},
          {"crowns_per_class", s.crowns_per_class},
          {"noise_sigma", s.noise_sigma},
          {"snr_db", s.snr_db},
          {"spectral_separation", s.spectral_separation},
          {"label_fraction", s.label_fraction}};
}

void merge_synth(const json& j, SynthConfig& s) {
  read_if(j, "height", s.height);
  read_if(j, "width", s.width);
  read_if(j, "bands", s.bands);
  read_if(j, "n_classes", s.n_classes);
  read_if(j, "crowns_per_class", s.crowns_per_class);
  read_if(j, "noise_sigma", s.noise_sigma);
  read_if(j, "snr_db", s.snr_db);
  read_if(j, "spectral_separation", s.spectral_separation);
  read_if(j, "label_fraction", s.label_fraction);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(pca.variance_target > 0.0 && pca.variance_target <= 1.0)) {
    throw Error("config: pca.variance_target must lie in (0, 1]");
  }
  if (slic.n_superpixels < 2) throw Error("config: slic.n_superpixels must be >= 2");
  if (!(slic.compactness > 0.0)) throw Error("config: slic.compactness must be > 0");
  if (slic.max_iters < 1) throw Error("config: slic.max_iters must be >= 1");
  graph.validate();
  train.weights.validate();
  if (train.hidden1 < 1 || train.hidden2 < 1) throw Error("config: hidden widths must be >= 1");
  if (train.n_iter < 0) throw Error("config: n_iter must be >= 0");
  if (!(train.adam.learning_rate > 0.0)) throw Error("config: learning_rate must be > 0");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("config: tau must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error("config: alpha must lie in [0, 1)");
  if (cube.empty() && !synth) throw Error("config: no cube path and no synth scene");
  if (!cube.empty()) {
    if (labels.empty()) throw Error("config: labels path is required with a cube");
    if (test_labels.empty() && split.train_fraction.has_value() == split.per_class_count.has_value()) {
      throw Error("config: split needs exactly one of train_fraction or per_class_count");
    }
  }
  if (synth) synth->validate();
}

json PipelineConfig::to_json() const {
  json j;
  j["cube"] = cube.string();
  j["labels"] = labels.string();
  j["test_labels"] = test_labels.string();
  j["output_dir"] = output_dir.string();
  j["mode"] = to_string(mode);
  j["seed"] = seed;
  j["pca"] = {{"variance_target", pca.variance_target}, {"standardize", pca.standardize}};
  j["slic"] = {{"n_superpixels", slic.n_superpixels},
               {"compactness", slic.compactness},
               {"max_iters", slic.max_iters},
               {"min_size_fraction", slic.min_size_fraction}};
  j["graph"] = {{"h", graph.h},
                {"beta", graph.beta},
                {"sigma_s", graph.sigma_s},
                {"sigma_l", graph.sigma_l},
                {"connectivity", graph.connectivity},
                {"n_s", graph.n_s}};
  j["train"] = {{"hidden1", train.hidden1},
                {"hidden2", train.hidden2},
                {"negative_slope", train.negative_slope},
                {"n_iter", train.n_iter},
                {"learning_rate", train.adam.learning_rate},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"epsilon", train.adam.epsilon},
                {"lambda_spc", train.weights.spc},
                {"lambda_g", train.weights.graph},
                {"lambda_v", train.weights.variance},
                {"lambda_en", train.weights.entropy},
                {"graph_term_unweighted", train.options.graph_term_unweighted}};
  j["tau"] = tau;
  j["alpha"] = alpha;
  j["split"] = json::object();
  if (split.train_fraction) j["split"]["train_fraction"] = *split.train_fraction;
  if (split.per_class_count) j["split"]["per_class_count"] = *split.per_class_count;
  j["synth"] = synth ? synth_json(*synth) : json(nullptr);
  j["cache"] = cache;
  return j;
}

void PipelineConfig::merge_json(const json& j) {
  if (!j.is_object()) throw Error("config: expected a JSON object");
  if (j.contains("config")) {  // a run manifest
    merge_json(j.at("config"));
    return;
  }
  try {
    if (j.contains("preset")) *this = preset(j.at("preset").get<std::string>());
    if (j.contains("cube")) cube = j.at("cube").get<std::string>();
    if (j.contains("labels")) labels = j.at("labels").get<std::string>();
    if (j.contains("test_labels")) test_labels = j.at("test_labels").get<std::string>();
    if (j.contains("output_dir")) output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("mode")) mode = parse_mode(j.at("mode").get<std::string>());
    read_if(j, "seed", seed);
    read_if(j, "tau", tau);
    read_if(j, "alpha", alpha);
    read_if(j, "cache", cache);
    if (j.contains("pca")) {
      const auto& p = j.at("pca");
      read_if(p, "variance_target", pca.variance_target);
      read_if(p, "standardize", pca.standardize);
    }
    if (j.contains("slic")) {
      const auto& s = j.at("slic");
      read_if(s, "n_superpixels", slic.n_superpixels);
      read_if(s, "compactness", slic.compactness);
      read_if(s, "max_iters", slic.max_iters);
      read_if(s, "min_size_fraction", slic.min_size_fraction);
    }
    if (j.contains("graph")) {
      const auto& g = j.at("graph");
      read_if(g, "h", graph.h);
      read_if(g, "beta", graph.beta);
      read_if(g, "sigma_s", graph.sigma_s);
      read_if(g, "sigma_l", graph.sigma_l);
      read_if(g, "connectivity", graph.connectivity);
      read_if(g, "n_s", graph.n_s);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      read_if(t, "hidden1", train.hidden1);
      read_if(t, "hidden2", train.hidden2);
      read_if(t, "negative_slope", train.negative_slope);
      read_if(t, "n_iter", train.n_iter);
      read_if(t, "learning_rate", train.adam.learning_rate);
      read_if(t, "beta1", train.adam.beta1);
      read_if(t, "beta2", train.adam.beta2);
      read_if(t, "epsilon", train.adam.epsilon);
      read_if(t, "lambda_spc", train.weights.spc);
      read_if(t, "lambda_g", train.weights.graph);
      read_if(t, "lambda_v", train.weights.variance);
      read_if(t, "lambda_en", train.weights.entropy);
      read_if(t, "graph_term_unweighted", train.options.graph_term_unweighted);
    }
    if (j.contains("split") && j.at("split").is_object()) {
      const auto& s = j.at("split");
      if (s.contains("train_fraction")) {
        split = {s.at("train_fraction").get<double>(), std::nullopt};
      } else if (s.contains("per_class_count")) {
        split = {std::nullopt, s.at("per_class_count").get<int>()};
      }
    }
    if (j.contains("synth")) {
      if (j.at("synth").is_null()) {
        synth.reset();
      } else {
        if (!synth) synth.emplace();
        merge_synth(j.at("synth"), *synth);
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
}

PipelineConfig preset(const std::string& name) {
  PipelineConfig cfg;
  if (name == "indian_pines") {
    cfg.slic.n_superpixels = 1200;
    cfg.graph = {15.0, 0.9, 2.0, 1.0, 8, 20};
    cfg.train.weights = {0.15, 1e5, 2.0, 20.0};
    cfg.train.hidden1 = 196;
    cfg.train.hidden2 = 160;
    cfg.train.n_iter = 500;
    cfg.split = {std::nullopt, 10};
  } else if (name == "french_guiana") {
    cfg.slic.n_superpixels = 5000;
    cfg.graph = {15.0, 0.5, 5.0, 40.0, 8, 20};
    cfg.train.weights = {0.1, 0.2, 0.1, 20.0};
    cfg.train.hidden1 = 582;
    cfg.train.hidden2 = 582;
    cfg.train.n_iter = 400;
    cfg.split = {0.1, std::nullopt};
  } else if (name == "synth") {
    cfg.synth = SynthConfig{};
    cfg.slic.n_superpixels = 200;
    cfg.graph = {1.0, 0.9, 0.2, 0.25, 8, 10};
    cfg.train.weights = {0.15, 1.0, 2.0, 20.0};
    cfg.train.hidden1 = 32;
    cfg.train.hidden2 = 32;
    cfg.train.n_iter = 200;
    cfg.train.adam.learning_rate = 1e-2;
  } else {
    throw Error("unknown preset '" + name + "'");
  }
  cfg.tau = 0.4;
  cfg.alpha = 0.5;
  return cfg;
}

std::vector<std::string> preset_names() { return {"indian_pines", "french_guiana", "synth"}; }

fs::path resolve_output_dir(const PipelineConfig& cfg) {
  if (const char* env = std::getenv("GRNN_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

PreparedScene prepare(const HsiCube& cube, const PipelineConfig& cfg, Exec exec) {
  PreparedScene s;
  stage("preprocess", [&] {
    s.pca = fit_pca(cube, cfg.pca);
    s.reduced = apply_pca(s.pca, cube, exec);
    s.pixels = pixel_matrix(s.reduced);
    s.first_component = first_component_image(s.reduced);
  });
  stage("segment", [&] { s.seg = slic_segment(s.first_component, cfg.slic, exec); });
  stage("graph", [&] { s.graph = build_graph(s.reduced, s.seg, cfg.graph, exec); });
  return s;
}

namespace {

// Map from NN probabilities (null in labelprop-only mode) and the ground-truth labels.
void label_stage(const PreparedScene& scene, const LabelMap& train_labels, int num_classes,
                 const PipelineConfig& cfg, const RowMatrix* probs, Classification& out) {
  const int h = scene.reduced.height, w = scene.reduced.width;
  if (cfg.mode == Mode::MlpOnly) {
    out.map = pixel_labels(*probs, h, w);
    mark_ground_truth(out.map, train_labels);
    return;
  }
  LabelMap merged = train_labels;
  if (probs) {
    stage("augment", [&] {
      const LabelMap confident = confident_set(*probs, h, w, cfg.tau);
      out.confident_pixels = confident.size();
      merged = merge_labels(train_labels, confident);
      out.augmented_pixels = merged.size() - train_labels.size();
    });
  }
  stage("propagate", [&] {
    const SuperpixelLabels sl = soft_labels(merged, scene.seg, num_classes);
    out.t_star = propagate(scene.graph, sl.hard, cfg.alpha);
    out.map = final_labels(out.t_star, scene.seg);
  });
  mark_ground_truth(out.map, train_labels);
}

}  // namespace

Classification classify(const PreparedScene& scene, const LabelMap& train_labels, int num_classes,
                        const PipelineConfig& cfg, std::uint64_t seed, Exec exec) {
  Classification out;
  if (cfg.mode == Mode::LabelPropOnly) {
    label_stage(scene, train_labels, num_classes, cfg, nullptr, out);
    return out;
  }
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  if (cfg.mode == Mode::MlpOnly) tc.weights = {};
  auto trained = stage("train", [&] {
    return train(scene.pixels, scene.seg, scene.graph, train_labels, num_classes, tc, exec);
  });
  out.history = std::move(trained.history);
  out.params = std::move(trained.params);
  const RowMatrix probs = stage("train", [&] { return predict(*out.params, scene.pixels, exec); });
  label_stage(scene, train_labels, num_classes, cfg, &probs, out);
  return out;
}

namespace {

struct Inputs {
  HsiCube cube;
  LabelMap train, test;
  int num_classes = 0;
};

LabelMap without(const LabelMap& all, const LabelMap& removed) {
  std::set<std::pair<int, int>> drop;
  for (const auto& e : removed.entries) drop.insert({e.row, e.col});
  LabelMap out = all;
  out.entries.clear();
  for (const auto& e : all.entries) {
    if (!drop.count({e.row, e.col})) out.entries.push_back(e);
  }
  return out;
}

// File inputs are read once; the split (or synthetic scene) follows `seed`.
class InputSource {
 public:
  explicit InputSource(const PipelineConfig& cfg) : cfg_(cfg) {
    if (cfg.cube.empty()) return;
    stage("load", [&] {
      cube_ = io::load_cube(cfg.cube);
      labels_ = io::load_labels(cfg.labels, cube_.height, cube_.width);
      if (!cfg.test_labels.empty()) {
        test_ = io::load_labels(cfg.test_labels, cube_.height, cube_.width);
      }
    });
  }

  bool seed_dependent_cube() const { return cfg_.cube.empty(); }

  Inputs get(std::uint64_t seed) const {
    Inputs in;
    if (cfg_.cube.empty()) {
      SynthConfig sc = *cfg_.synth;
      sc.seed = seed;
      SynthScene scene = stage("synth", [&] { return generate(sc); });
      in.cube = std::move(scene.cube);
      in.train = std::move(scene.sparse);
      in.test = without(scene.truth, in.train);
      in.num_classes = sc.n_classes;
      return in;
    }
    in.cube = cube_;
    if (!cfg_.test_labels.empty()) {
      in.train = labels_;
      in.test = test_;
    } else {
      std::tie(in.train, in.test) = stage("split", [&] { return split_labels(labels_, cfg_.split, seed); });
    }
    in.num_classes = std::max(in.train.num_classes, in.test.num_classes);
    in.train.num_classes = in.test.num_classes = in.num_classes;
    return in;
  }

 private:
  const PipelineConfig& cfg_;
  HsiCube cube_;
  LabelMap labels_, test_;
};

std::string cube_digest(const HsiCube& cube) {
  std::uint64_t h = fnv1a(std::to_string(cube.height) + "x" + std::to_string(cube.width) + "x" +
                          std::to_string(cube.bands));
  h = fnv1a({reinterpret_cast<const char*>(cube.data.data()), cube.data.size() * sizeof(float)}, h);
  return hex(h);
}

std::string labels_digest(const LabelMap& labels) {
  std::string s;
  for (const auto& e : labels.entries) {
    s += std::to_string(e.row) + "," + std::to_string(e.col) + "," + std::to_string(e.class_id) + "\n";
  }
  return hex(fnv1a(s));
}

std::string key(const std::string& parent, const json& part) {
  return hex(fnv1a(parent + part.dump()));
}

// prepare() with each stage result stored under a name derived from its inputs.
PreparedScene prepare_cached(const HsiCube& cube, const PipelineConfig& cfg, const fs::path& dir,
                             Exec exec, std::string& graph_key) {
  if (!cfg.cache) {
    graph_key.clear();
    return prepare(cube, cfg, exec);
  }
  fs::create_directories(dir);
  const auto j = cfg.to_json();
  const std::string pca_key = key(cube_digest(cube), j["pca"]);
  const std::string seg_key = key(pca_key, j["slic"]);
  graph_key = key(seg_key, j["graph"]);

  PreparedScene s;
  stage("preprocess", [&] {
    const fs::path p = dir / ("pca-" + pca_key + ".json");
    if (fs::exists(p)) {
      s.pca = load_pca(p);
    } else {
      s.pca = fit_pca(cube, cfg.pca);
      save_pca(s.pca, p);
    }
    s.reduced = apply_pca(s.pca, cube, exec);
    s.pixels = pixel_matrix(s.reduced);
    s.first_component = first_component_image(s.reduced);
  });
  stage("segment", [&] {
    const fs::path p = dir / ("seg-" + seg_key + ".json");
    if (fs::exists(p)) {
      s.seg = io::load_segmentation(p);
    } else {
      s.seg = slic_segment(s.first_component, cfg.slic, exec);
      io::save_segmentation(s.seg, p);
    }
  });
  stage("graph", [&] {
    const fs::path p = dir / ("graph-" + graph_key + ".csv");
    if (fs::exists(p)) {
      s.graph = load_graph(p);
    } else {
      s.graph = build_graph(s.reduced, s.seg, cfg.graph, exec);
      save_graph(s.graph, p);
    }
  });
  return s;
}

json history_json(const std::vector<LossBreakdown>& history) {
  json out = json::array();
  for (const auto& l : history) {
    out.push_back({l.pixel, l.superpixel, l.graph, l.variance, l.entropy, l.total});
  }
  return out;
}

std::vector<LossBreakdown> history_from_json(const json& j) {
  std::vector<LossBreakdown> out;
  for (const auto& r : j) {
    out.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>(),
                   r[4].get<double>(), r[5].get<double>()});
  }
  return out;
}

// classify() reusing a stored training result when graph, labels, config and seed match.
Classification classify_cached(const PreparedScene& scene, const Inputs& in, const PipelineConfig& cfg,
                               std::uint64_t seed, const fs::path& dir, const std::string& graph_key,
                               Exec exec) {
  if (!cfg.cache || graph_key.empty() || cfg.mode == Mode::LabelPropOnly) {
    return classify(scene, in.train, in.num_classes, cfg, seed, exec);
  }
  const auto j = cfg.to_json();
  const json part = {j["train"], labels_digest(in.train), seed, to_string(cfg.mode)};
  const fs::path p = dir / ("model-" + key(graph_key, part) + ".json");
  if (!fs::exists(p)) {
    auto out = classify(scene, in.train, in.num_classes, cfg, seed, exec);
    const auto& prm = *out.params;
    const json blob = {{"inputs", prm.shape.inputs},
                       {"hidden1", prm.shape.hidden1},
                       {"hidden2", prm.shape.hidden2},
                       {"classes", prm.shape.classes},
                       {"negative_slope", prm.slope},
                       {"seed", prm.seed},
                       {"theta", prm.theta},
                       {"history", history_json(out.history)}};
    io::write_text(p, blob.dump());
    return out;
  }
  const json blob = stage("train", [&] { return json::parse(io::read_text(p)); });
  MlpParams prm;
  prm.shape = {blob["inputs"].get<int>(), blob["hidden1"].get<int>(), blob["hidden2"].get<int>(),
               blob["classes"].get<int>()};
  prm.slope = blob["negative_slope"].get<double>();
  prm.seed = blob["seed"].get<std::uint64_t>();
  prm.theta = blob["theta"].get<std::vector<double>>();
  if (prm.theta.size() != prm.shape.parameter_count()) throw Error("train: corrupt cache " + p.string());

  Classification out;
  out.history = history_from_json(blob["history"]);
  out.params = prm;
  const RowMatrix probs = predict(prm, scene.pixels, exec);
  label_stage(scene, in.train, in.num_classes, cfg, &probs, out);
  return out;
}

json report_json(const PipelineConfig& cfg, std::uint64_t seed, const PreparedScene& scene,
                 const Inputs& in, const Classification& cls, const EvalReport& report) {
  std::size_t fallback = 0;
  for (auto p : cls.map.provenance) fallback += p == Provenance::Fallback;
  json j = report.to_json();
  j["mode"] = to_string(cfg.mode);
  j["seed"] = seed;
  j["reduced_bands"] = scene.pca.output_bands();
  j["superpixels"] = scene.seg.count;
  j["graph_nonzeros"] = scene.graph.nonzeros();
  j["train_pixels"] = in.train.size();
  j["confident_pixels"] = cls.confident_pixels;
  j["augmented_pixels"] = cls.augmented_pixels;
  j["fallback_pixels"] = fallback;
  j["final_loss"] = cls.history.empty() ? json(nullptr) : json(cls.history.back().total);
  return j;
}

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& cfg_in, Exec exec) {
  PipelineConfig cfg = cfg_in;
  cfg.validate();
  const fs::path out_dir = resolve_output_dir(cfg);
  fs::create_directories(out_dir);
  const fs::path cache_dir = out_dir / "cache";

  InputSource source(cfg);
  Inputs in = source.get(cfg.seed);
  stage("segment", [&] { cfg.slic.validate(in.cube.height, in.cube.width); });

  std::string graph_key;
  const PreparedScene scene = prepare_cached(in.cube, cfg, cache_dir, exec, graph_key);
  PipelineRun run;
  run.result = classify_cached(scene, in, cfg, cfg.seed, cache_dir, graph_key, exec);
  run.report = stage("evaluate", [&] { return evaluate(run.result.map, in.test); });
  run.report_json = report_json(cfg, cfg.seed, scene, in, run.result, run.report);

  std::vector<std::string> artifacts;
  stage("emit", [&] {
    auto put = [&](const std::string& name) {
      artifacts.push_back(name);
      return out_dir / name;
    };
    io::emit_map(run.result.map, default_palette(in.num_classes), put("map.ppm"));
    io::emit_boundaries(scene.first_component, scene.seg, put("segments.ppm"));
    io::write_text(put("report.json"), run.report_json.dump(2) + "\n");
    io::write_text(put("report.txt"), run.report.to_table());
    save_history_csv(run.result.history, put("loss_history.csv"));
    if (run.result.t_star.size()) save_matrix_csv(run.result.t_star, put("t_star.csv"));
    if (run.result.params) save_checkpoint(*run.result.params, put("model.json"));
    io::save_labels(in.train, put("train_labels.csv"));
    io::save_labels(in.test, put("test_labels.csv"));

    const json config = cfg.to_json();
    json manifest = {{"config", config},
                     {"config_hash", hex(fnv1a(config.dump()))},
                     {"seed", cfg.seed},
                     {"threads", max_threads()},
                     {"cube_hash", cube_digest(in.cube)},
                     {"train_labels_hash", labels_digest(in.train)},
                     {"report_hash", hex(fnv1a(run.report_json.dump()))},
                     {"artifacts", artifacts}};
    io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  });
  run.train = std::move(in.train);
  run.test = std::move(in.test);
  return run;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / double(values.size() - 1))};
}

json TrialsSummary::to_json() const {
  json trials = json::array();
  for (const auto& r : reports) trials.push_back({{"oa", r.oa}, {"kappa", r.kappa}});
  return {{"n_trials", reports.size()}, {"oa_mean", oa_mean}, {"oa_sd", oa_sd},
          {"kappa_mean", kappa_mean},   {"kappa_sd", kappa_sd}, {"trials", trials}};
}

TrialsSummary run_trials(const PipelineConfig& cfg_in, int n_trials, std::uint64_t base_seed, Exec exec) {
  if (n_trials < 1) throw Error("trials: n_trials must be >= 1");
  PipelineConfig cfg = cfg_in;
  cfg.validate();
  InputSource source(cfg);
  std::optional<PreparedScene> shared;
  TrialsSummary summary;
  std::vector<double> oa, kappa;
  for (int i = 0; i < n_trials; ++i) {
    const std::uint64_t seed = base_seed + std::uint64_t(i);
    const Inputs in = source.get(seed);
    std::optional<PreparedScene> own;
    const PreparedScene* scene;
    if (source.seed_dependent_cube()) {
      stage("segment", [&] { cfg.slic.validate(in.cube.height, in.cube.width); });
      own = prepare(in.cube, cfg, exec);
      scene = &*own;
    } else {
      if (!shared) {
        stage("segment", [&] { cfg.slic.validate(in.cube.height, in.cube.width); });
        shared = prepare(in.cube, cfg, exec);
      }
      scene = &*shared;
    }
    const Classification cls = classify(*scene, in.train, in.num_classes, cfg, seed, exec);
    summary.reports.push_back(stage("evaluate", [&] { return evaluate(cls.map, in.test); }));
    oa.push_back(summary.reports.back().oa);
    kappa.push_back(summary.reports.back().kappa);
  }
  std::tie(summary.oa_mean, summary.oa_sd) = mean_sd(oa);
  std::tie(summary.kappa_mean, summary.kappa_sd) = mean_sd(kappa);
  return summary;
}

}  // namespace grnn
