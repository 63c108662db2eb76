// grnn: batch driver for superpixel-graph regularized HSI classification.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "grnn/io.hpp"
#include "grnn/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by `run` and `trials`; only flags given on the command line
// override the config file.
struct RunFlags {
  std::string config, preset;
  std::optional<std::string> cube, labels, test_labels, out, mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, alpha, variance, lr, lambda_spc, lambda_g, lambda_v, lambda_en;
  std::optional<int> superpixels, n_iter, hidden1, hidden2, per_class;
  std::optional<double> train_fraction;
  bool no_cache = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file or run manifest");
    app->add_option("--preset", preset, "indian_pines | french_guiana | synth");
    app->add_option("--cube", cube, "cube header (.json)");
    app->add_option("--labels", labels, "labeled pixels CSV (row,col,class_id)");
    app->add_option("--test-labels", test_labels, "held-out truth CSV; disables the split");
    app->add_option("--out", out, "output directory");
    app->add_option("--mode", mode, "grnn | mlp-only | labelprop-only");
    app->add_option("--seed", seed);
    app->add_option("--tau", tau, "confidence threshold");
    app->add_option("--alpha", alpha, "propagation weight in [0,1)");
    app->add_option("--variance-target", variance);
    app->add_option("--superpixels", superpixels);
    app->add_option("--n-iter", n_iter);
    app->add_option("--hidden1", hidden1);
    app->add_option("--hidden2", hidden2);
    app->add_option("--learning-rate", lr);
    app->add_option("--lambda-spc", lambda_spc);
    app->add_option("--lambda-g", lambda_g);
    app->add_option("--lambda-v", lambda_v);
    app->add_option("--lambda-en", lambda_en);
    app->add_option("--per-class", per_class, "training pixels per class");
    app->add_option("--train-fraction", train_fraction);
    app->add_flag("--no-cache", no_cache);
  }

  grnn::PipelineConfig resolve() const {
    grnn::PipelineConfig cfg = preset.empty() ? grnn::preset("synth") : grnn::preset(preset);
    if (!config.empty()) cfg.merge_json(json::parse(grnn::io::read_text(config)));
    if (cube) cfg.cube = *cube, cfg.synth.reset();
    if (labels) cfg.labels = *labels;
    if (test_labels) cfg.test_labels = *test_labels;
    if (out) cfg.output_dir = *out;
    if (mode) cfg.mode = grnn::parse_mode(*mode);
    if (seed) cfg.seed = *seed;
    if (tau) cfg.tau = *tau;
    if (alpha) cfg.alpha = *alpha;
    if (variance) cfg.pca.variance_target = *variance;
    if (superpixels) cfg.slic.n_superpixels = *superpixels;
    if (n_iter) cfg.train.n_iter = *n_iter;
    if (hidden1) cfg.train.hidden1 = *hidden1;
    if (hidden2) cfg.train.hidden2 = *hidden2;
    if (lr) cfg.train.adam.learning_rate = *lr;
    if (lambda_spc) cfg.train.weights.spc = *lambda_spc;
    if (lambda_g) cfg.train.weights.graph = *lambda_g;
    if (lambda_v) cfg.train.weights.variance = *lambda_v;
    if (lambda_en) cfg.train.weights.entropy = *lambda_en;
    if (per_class) cfg.split = {std::nullopt, *per_class};
    if (train_fraction) cfg.split = {*train_fraction, std::nullopt};
    if (no_cache) cfg.cache = false;
    return cfg;
  }
};

grnn::Mode mode_or(const std::string& s) { return grnn::parse_mode(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-regularized neural network classification of hyperspectral images"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (1 gives bitwise reproducible runs)");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic crown scene");
  grnn::SynthConfig sc;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--height", sc.height);
  synth->add_option("--width", sc.width);
  synth->add_option("--bands", sc.bands);
  synth->add_option("--classes", sc.n_classes);
  synth->add_option("--crowns-per-class", sc.crowns_per_class);
  synth->add_option("--noise-sigma", sc.noise_sigma, "used when --snr-db is 0");
  synth->add_option("--snr-db", sc.snr_db);
  synth->add_option("--separation", sc.spectral_separation);
  synth->add_option("--label-fraction", sc.label_fraction);
  synth->add_option("--seed", sc.seed);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "fit PCA and write the reduced cube");
  std::string pre_cube, pre_out;
  grnn::PcaConfig pca_cfg;
  pre->add_option("--cube", pre_cube)->required();
  pre->add_option("--out", pre_out, "output directory")->required();
  pre->add_option("--variance-target", pca_cfg.variance_target);
  pre->add_flag("--standardize", pca_cfg.standardize);

  // segment
  auto* seg = app.add_subcommand("segment", "SLIC superpixels on the first principal component");
  std::string seg_reduced, seg_out, seg_overlay;
  grnn::SlicConfig slic_cfg;
  seg->add_option("--reduced", seg_reduced, "reduced cube header")->required();
  seg->add_option("--out", seg_out, "segmentation header")->required();
  seg->add_option("--superpixels", slic_cfg.n_superpixels);
  seg->add_option("--compactness", slic_cfg.compactness);
  seg->add_option("--iters", slic_cfg.max_iters);
  seg->add_option("--overlay", seg_overlay, "boundary overlay PPM");

  // graph
  auto* gr = app.add_subcommand("graph", "superpixel similarity graph");
  std::string gr_reduced, gr_seg, gr_out;
  grnn::GraphConfig graph_cfg;
  gr->add_option("--reduced", gr_reduced)->required();
  gr->add_option("--seg", gr_seg)->required();
  gr->add_option("--out", gr_out, "edge list CSV")->required();
  gr->add_option("--bandwidth", graph_cfg.h, "kernel bandwidth h");
  gr->add_option("--beta", graph_cfg.beta);
  gr->add_option("--sigma-s", graph_cfg.sigma_s);
  gr->add_option("--sigma-l", graph_cfg.sigma_l);
  gr->add_option("--connectivity", graph_cfg.connectivity);
  gr->add_option("--n-s", graph_cfg.n_s);

  // train
  auto* tr = app.add_subcommand("train", "train the pixel classifier");
  std::string tr_reduced, tr_seg, tr_graph, tr_labels, tr_out, tr_history, tr_mode = "grnn";
  grnn::TrainConfig train_cfg;
  int tr_classes = 0;
  tr->add_option("--reduced", tr_reduced)->required();
  tr->add_option("--seg", tr_seg)->required();
  tr->add_option("--graph", tr_graph)->required();
  tr->add_option("--labels", tr_labels)->required();
  tr->add_option("--classes", tr_classes, "class count (default: largest label)");
  tr->add_option("--out", tr_out, "checkpoint header")->required();
  tr->add_option("--history", tr_history, "loss history CSV");
  tr->add_option("--mode", tr_mode, "grnn | mlp-only");
  tr->add_option("--hidden1", train_cfg.hidden1);
  tr->add_option("--hidden2", train_cfg.hidden2);
  tr->add_option("--n-iter", train_cfg.n_iter);
  tr->add_option("--learning-rate", train_cfg.adam.learning_rate);
  tr->add_option("--lambda-spc", train_cfg.weights.spc);
  tr->add_option("--lambda-g", train_cfg.weights.graph);
  tr->add_option("--lambda-v", train_cfg.weights.variance);
  tr->add_option("--lambda-en", train_cfg.weights.entropy);
  tr->add_flag("--unweighted-graph-term", train_cfg.options.graph_term_unweighted);
  tr->add_option("--seed", train_cfg.seed);

  // classify
  auto* cl = app.add_subcommand("classify", "augment, propagate and label");
  std::string cl_reduced, cl_seg, cl_graph, cl_model, cl_labels, cl_out, cl_ppm, cl_mode = "grnn";
  double cl_tau = 0.4, cl_alpha = 0.5;
  int cl_classes = 0;
  cl->add_option("--reduced", cl_reduced)->required();
  cl->add_option("--seg", cl_seg)->required();
  cl->add_option("--graph", cl_graph)->required();
  cl->add_option("--model", cl_model, "checkpoint (unused in labelprop-only mode)");
  cl->add_option("--labels", cl_labels)->required();
  cl->add_option("--classes", cl_classes);
  cl->add_option("--mode", cl_mode);
  cl->add_option("--tau", cl_tau);
  cl->add_option("--alpha", cl_alpha);
  cl->add_option("--out", cl_out, "classification raster header")->required();
  cl->add_option("--ppm", cl_ppm, "color map");

  // eval
  auto* ev = app.add_subcommand("eval", "score a classification map");
  std::string ev_map, ev_truth, ev_out;
  ev->add_option("--map", ev_map)->required();
  ev->add_option("--truth", ev_truth, "held-out labels CSV")->required();
  ev->add_option("--out", ev_out, "report JSON");

  // run / trials
  auto* run = app.add_subcommand("run", "full pipeline");
  RunFlags run_flags;
  run_flags.add(run);
  auto* trials = app.add_subcommand("trials", "repeated runs over seeds");
  RunFlags trial_flags;
  int n_trials = 10;
  std::uint64_t base_seed = 0;
  trial_flags.add(trials);
  trials->add_option("--n", n_trials, "number of trials");
  trials->add_option("--base-seed", base_seed);

  CLI11_PARSE(app, argc, argv);
  grnn::set_threads(threads);

  try {
    if (*synth) {
      const auto scene = grnn::generate(sc);
      fs::create_directories(synth_out);
      const fs::path d = synth_out;
      grnn::io::save_cube(scene.cube, d / "cube.json");
      grnn::io::save_labels(scene.truth, d / "truth.csv");
      grnn::io::save_labels(scene.sparse, d / "labels.csv");
      std::printf("wrote %dx%dx%d cube, %zu labeled of %zu pixels, noise sigma %.6g\n",
                  scene.cube.height, scene.cube.width, scene.cube.bands, scene.sparse.size(),
                  scene.truth.size(), scene.noise_sigma);
    } else if (*pre) {
      const auto cube = grnn::io::load_cube(pre_cube);
      const auto model = grnn::fit_pca(cube, pca_cfg);
      const auto reduced = grnn::apply_pca(model, cube);
      fs::create_directories(pre_out);
      grnn::save_pca(model, fs::path(pre_out) / "pca.json");
      grnn::io::save_feature_cube(reduced, fs::path(pre_out) / "reduced.json");
      std::printf("kept %d of %d bands\n", model.output_bands(), model.input_bands());
    } else if (*seg) {
      const auto reduced = grnn::io::load_feature_cube(seg_reduced);
      const auto image = grnn::first_component_image(reduced);
      const auto s = grnn::slic_segment(image, slic_cfg);
      grnn::io::save_segmentation(s, seg_out);
      if (!seg_overlay.empty()) grnn::io::emit_boundaries(image, s, seg_overlay);
      std::printf("%d superpixels\n", s.count);
    } else if (*gr) {
      const auto reduced = grnn::io::load_feature_cube(gr_reduced);
      const auto s = grnn::io::load_segmentation(gr_seg);
      const auto g = grnn::build_graph(reduced, s, graph_cfg);
      grnn::save_graph(g, gr_out);
      std::printf("%d nodes, %zu stored entries\n", g.n, g.nonzeros());
    } else if (*tr) {
      const auto reduced = grnn::io::load_feature_cube(tr_reduced);
      const auto s = grnn::io::load_segmentation(tr_seg);
      const auto g = grnn::load_graph(tr_graph);
      const auto labels = grnn::io::load_labels(tr_labels, reduced.height, reduced.width, tr_classes);
      if (mode_or(tr_mode) == grnn::Mode::MlpOnly) train_cfg.weights = {};
      const auto res = grnn::train(grnn::pixel_matrix(reduced), s, g, labels, labels.num_classes, train_cfg);
      grnn::save_checkpoint(res.params, tr_out);
      if (!tr_history.empty()) grnn::save_history_csv(res.history, tr_history);
      if (!res.history.empty()) std::printf("final loss %.6g\n", res.history.back().total);
    } else if (*cl) {
      grnn::PipelineConfig cfg;
      cfg.mode = mode_or(cl_mode);
      cfg.tau = cl_tau;
      cfg.alpha = cl_alpha;
      grnn::PreparedScene scene;
      scene.reduced = grnn::io::load_feature_cube(cl_reduced);
      scene.pixels = grnn::pixel_matrix(scene.reduced);
      scene.seg = grnn::io::load_segmentation(cl_seg);
      scene.graph = grnn::load_graph(cl_graph);
      const auto labels =
          grnn::io::load_labels(cl_labels, scene.reduced.height, scene.reduced.width, cl_classes);
      grnn::ClassificationMap map;
      if (cfg.mode == grnn::Mode::LabelPropOnly) {
        map = grnn::classify(scene, labels, labels.num_classes, cfg, 0).map;
      } else {
        if (cl_model.empty()) throw grnn::Error("--model is required in this mode");
        const auto params = grnn::load_checkpoint(cl_model);
        const auto probs = grnn::predict(params, scene.pixels);
        if (cfg.mode == grnn::Mode::MlpOnly) {
          map = grnn::pixel_labels(probs, scene.reduced.height, scene.reduced.width);
        } else {
          const auto merged = grnn::merge_labels(
              labels, grnn::confident_set(probs, scene.reduced.height, scene.reduced.width, cfg.tau));
          const auto sl = grnn::soft_labels(merged, scene.seg, labels.num_classes);
          map = grnn::final_labels(grnn::propagate(scene.graph, sl.hard, cfg.alpha), scene.seg);
        }
        grnn::mark_ground_truth(map, labels);
      }
      grnn::io::save_classification(map, cl_out);
      if (!cl_ppm.empty()) grnn::io::emit_map(map, grnn::default_palette(map.num_classes), cl_ppm);
    } else if (*ev) {
      const auto map = grnn::io::load_classification(ev_map);
      const auto truth = grnn::io::load_labels(ev_truth, map.height, map.width);
      const auto report = grnn::evaluate(map, truth);
      if (!ev_out.empty()) grnn::io::write_text(ev_out, report.to_json().dump(2) + "\n");
      std::cout << report.to_table();
    } else if (*run) {
      const auto cfg = run_flags.resolve();
      const auto result = grnn::run_pipeline(cfg);
      std::cout << result.report.to_table() << "artifacts in " << grnn::resolve_output_dir(cfg).string()
                << "\n";
    } else if (*trials) {
      const auto cfg = trial_flags.resolve();
      const auto summary = grnn::run_trials(cfg, n_trials, base_seed);
      const fs::path out = grnn::resolve_output_dir(cfg);
      fs::create_directories(out);
      json j = summary.to_json();
      j["config"] = cfg.to_json();
      j["base_seed"] = base_seed;
      grnn::io::write_text(out / "trials.json", j.dump(2) + "\n");
      std::printf("%s: OA %.4f +- %.4f, kappa %.4f +- %.4f over %d trials\n",
                  grnn::to_string(cfg.mode).c_str(), summary.oa_mean, summary.oa_sd,
                  summary.kappa_mean, summary.kappa_sd, n_trials);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "grnn: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
