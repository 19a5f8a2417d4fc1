// Batch command-line surface for the spiking visual hierarchy.
//
// Subcommands: synth | train | extract | classify | analyze | reconstruct |
// baseline. Every command that touches the pipeline reads a key-value run
// config, writes its artifacts into the configured output directory, and
// drops a run-metadata JSON with the config hash, seed and timings. On
// failure a machine-readable error JSON goes to stderr and the exit code is
// 2 (config error), 3 (data error) or 4 (non-convergence).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikevis/spikevis.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

spikevis::RunConfig load_config_or_throw(const std::string& path) {
  if (path.empty()) throw spikevis::ConfigError("a --config file is required");
  return spikevis::load_run_config(path);
}

void ensure_output_dir(const spikevis::RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw spikevis::ConfigError("cannot create output_dir '" + cfg.output_dir +
                                "': " + ec.message());
  }
}

std::string feature_file_hash(const std::string& csv_path) {
  const nlohmann::json meta = spikevis::detail::read_json_file(csv_path + ".meta.json");
  return meta.at("config_hash").get<std::string>();
}

// ---------------------------------------------------------------------------
// synth: seeded corpus generator.

struct SynthArgs {
  std::string out_dir;
  std::string classes = "cross,ex,ring,rails";
  int train_per_class = 100;
  int test_per_class = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;
  int canvas = 136;
  double arm = 42.0;
  double halfwidth = 1.6;
  int clutter = 8;
  double pixel_noise = 0.02;
  double rotation_jitter = 0.0;
  std::string sizes = "1.0";
};

spikevis::ShapeKind parse_shape(const std::string& name) {
  using spikevis::ShapeKind;
  for (ShapeKind k : {ShapeKind::Cross, ShapeKind::Ex, ShapeKind::Tee, ShapeKind::Ring,
                      ShapeKind::Rails}) {
    if (name == spikevis::shape_name(k)) return k;
  }
  throw spikevis::ConfigError("unknown shape '" + name +
                              "' (expected cross, ex, tee, ring or rails)");
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    out.push_back(csv.substr(start, comma == std::string::npos ? std::string::npos
                                                               : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int run_synth(const SynthArgs& a) {
  if (!a.have_seed) throw spikevis::ConfigError("synth: --seed is required");
  if (a.out_dir.empty()) throw spikevis::ConfigError("synth: --out is required");
  spikevis::CorpusSpec spec;
  spec.dir = a.out_dir;
  for (const std::string& name : split_list(a.classes)) {
    spec.classes.push_back(parse_shape(name));
  }
  spec.train_per_class = a.train_per_class;
  spec.test_per_class = a.test_per_class;
  spec.seed = a.seed;
  spec.params.canvas = a.canvas;
  spec.params.arm = a.arm;
  spec.params.stroke_halfwidth = a.halfwidth;
  spec.params.clutter = a.clutter;
  spec.params.pixel_noise = a.pixel_noise;
  spec.params.rotation_jitter = a.rotation_jitter;
  spec.size_scales.clear();
  for (const std::string& s : split_list(a.sizes)) {
    spec.size_scales.push_back(spikevis::detail::parse_double("sizes", s));
  }
  const spikevis::DatasetManifest manifest = spikevis::generate_corpus(spec);
  std::printf("wrote %zu images and %s\n", manifest.records.size(),
              join_path(a.out_dir, "manifest.csv").c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// train

int run_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& split) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  spikevis::DatasetManifest manifest = spikevis::load_manifest(manifest_path);
  if (!split.empty()) manifest = spikevis::filter_split(manifest, split);
  if (manifest.records.empty()) {
    throw spikevis::DataError("train: no records in split '" + split + "' of " + manifest_path);
  }
  const double t_load = seconds_since(t0);

  const auto t1 = Clock::now();
  const spikevis::TrainOutcome outcome = spikevis::train(manifest, cfg.train, cfg.encoder);
  const double t_train = seconds_since(t1);

  const std::string proto_path = join_path(cfg.output_dir, "prototypes.json");
  spikevis::save_prototypes(proto_path, outcome.prototypes, cfg.encoder, hash, cfg.seed);
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_train.json"), "train", hash,
                              cfg.seed,
                              {{"load", t_load}, {"train", t_train}, {"total", seconds_since(t0)}},
                              {proto_path});
  std::printf("trained %zu prototypes in %d epochs (%zu presentations); wrote %s\n",
              outcome.prototypes.size(), outcome.epochs, outcome.presentations,
              proto_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// extract

int run_extract(const std::string& config_path, const std::string& manifest_path,
                const std::string& prototypes_path, const std::string& split,
                const std::string& out_name) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  const spikevis::PrototypeFile pf = spikevis::load_prototypes(prototypes_path);
  if (!(pf.encoder == cfg.encoder)) {
    throw spikevis::ConfigError(
        "config mismatch: prototype file " + prototypes_path +
        " was built with a different encoder config than the current run config");
  }

  spikevis::DatasetManifest manifest = spikevis::load_manifest(manifest_path);
  if (!split.empty()) manifest = spikevis::filter_split(manifest, split);
  if (manifest.records.empty()) {
    throw spikevis::DataError("extract: no records in split '" + split + "' of " +
                              manifest_path);
  }

  const auto t1 = Clock::now();
  const spikevis::FeatureMatrix fm =
      spikevis::extract_features(manifest, pf.prototypes, cfg.encoder);
  const double t_extract = seconds_since(t1);

  const std::string csv_path = join_path(cfg.output_dir, out_name);
  spikevis::save_features_csv(csv_path, fm, hash, cfg.seed);
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_extract.json"), "extract", hash,
                              cfg.seed, {{"extract", t_extract}, {"total", seconds_since(t0)}},
                              {csv_path, csv_path + ".meta.json"});
  std::printf("extracted %dx%d features; wrote %s\n", fm.rows(), fm.cols(), csv_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// classify

int run_classify(const std::string& config_path, const std::string& train_csv,
                 const std::string& test_csv) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  if (feature_file_hash(train_csv) != hash) {
    throw spikevis::ConfigError("config mismatch: " + train_csv +
                                " was extracted under a different run config");
  }
  const spikevis::FeatureMatrix train_fm = spikevis::load_features_csv(train_csv);
  spikevis::FeatureMatrix test_fm;
  const bool have_test = !test_csv.empty();
  if (have_test) {
    if (feature_file_hash(test_csv) != hash) {
      throw spikevis::ConfigError("config mismatch: " + test_csv +
                                  " was extracted under a different run config");
    }
    test_fm = spikevis::load_features_csv(test_csv);
  }

  nlohmann::json report;
  report["format"] = "spikevis-accuracy-report";
  report["version"] = 1;
  report["config_hash"] = hash;
  report["seed"] = cfg.seed;
  report["train_rows"] = train_fm.rows();
  if (have_test) report["test_rows"] = test_fm.rows();
  std::vector<std::string> artifacts;
  std::map<std::string, double> timings;

  auto confusion = [](const auto& model, const spikevis::FeatureMatrix& fm, auto predict) {
    const std::vector<std::string> classes = spikevis::detail::sorted_classes(fm);
    std::map<std::string, std::map<std::string, int>> table;
    for (int i = 0; i < fm.rows(); ++i) {
      table[fm.label(i)][predict(model, fm.values[static_cast<std::size_t>(i)])]++;
    }
    nlohmann::json j;
    for (const auto& [truth, row] : table) j[truth] = row;
    return j;
  };

  if (cfg.classifier == "simple" || cfg.classifier == "both") {
    const auto t1 = Clock::now();
    const spikevis::SimpleClassifierModel model = spikevis::train_simple(train_fm);
    timings["train_simple"] = seconds_since(t1);
    const std::string model_path = join_path(cfg.output_dir, "simple_model.json");
    spikevis::save_simple_model(model_path, model, hash, cfg.seed);
    artifacts.push_back(model_path);
    nlohmann::json& r = report["simple"];
    r["train_accuracy"] = spikevis::accuracy_simple(model, train_fm);
    if (have_test) {
      r["test_accuracy"] = spikevis::accuracy_simple(model, test_fm);
      r["test_confusion"] = confusion(model, test_fm, [](const auto& m, const auto& row) {
        return spikevis::predict_simple(m, row);
      });
    }
  }
  if (cfg.classifier == "linear" || cfg.classifier == "both") {
    const auto t1 = Clock::now();
    spikevis::LinearTrainConfig lin;
    lin.lambda = cfg.linear_lambda;
    lin.epochs = cfg.linear_epochs;
    const spikevis::LinearOvOModel model = spikevis::train_linear(train_fm, lin);
    timings["train_linear"] = seconds_since(t1);
    const std::string model_path = join_path(cfg.output_dir, "linear_model.json");
    spikevis::save_linear_model(model_path, model, hash, cfg.seed);
    artifacts.push_back(model_path);
    nlohmann::json& r = report["linear"];
    r["train_accuracy"] = spikevis::accuracy_linear(model, train_fm);
    if (have_test) {
      r["test_accuracy"] = spikevis::accuracy_linear(model, test_fm);
      r["test_confusion"] = confusion(model, test_fm, [](const auto& m, const auto& row) {
        return spikevis::predict_linear(m, row);
      });
    }
  }

  const std::string report_path = join_path(cfg.output_dir, "accuracy_report.json");
  spikevis::detail::write_text_file(report_path, report.dump(1) + "\n");
  artifacts.push_back(report_path);
  timings["total"] = seconds_since(t0);
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_classify.json"), "classify", hash,
                              cfg.seed, timings, artifacts);
  std::printf("wrote %s\n", report_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

int run_analyze(const std::string& config_path, const std::string& features_csv) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  if (feature_file_hash(features_csv) != hash) {
    throw spikevis::ConfigError("config mismatch: " + features_csv +
                                " was extracted under a different run config");
  }
  const spikevis::FeatureMatrix fm = spikevis::load_features_csv(features_csv);
  if (cfg.mi_k > fm.cols()) {
    throw spikevis::ConfigError("mi_k (" + std::to_string(cfg.mi_k) +
                                ") exceeds the feature count (" + std::to_string(fm.cols()) +
                                ")");
  }
  std::vector<std::string> artifacts;
  std::map<std::string, double> timings;

  const auto t_rdm = Clock::now();
  const spikevis::Rdm full = spikevis::rdm(fm);
  const std::string rdm_path = join_path(cfg.output_dir, "rdm.csv");
  spikevis::save_rdm(rdm_path, full, hash, cfg.seed);
  artifacts.push_back(rdm_path);
  artifacts.push_back(rdm_path + ".meta.json");

  // One RDM per distinct view tag when views are present.
  std::vector<std::string> views;
  for (const spikevis::ManifestRecord& r : fm.records) {
    if (!r.view.empty() &&
        std::find(views.begin(), views.end(), r.view) == views.end()) {
      views.push_back(r.view);
    }
  }
  if (views.size() > 1) {
    for (const std::string& v : views) {
      const std::string path = join_path(cfg.output_dir, "rdm_view_" + v + ".csv");
      spikevis::save_rdm(path, spikevis::rdm(fm, v), hash, cfg.seed);
      artifacts.push_back(path);
      artifacts.push_back(path + ".meta.json");
    }
  }
  timings["rdm"] = seconds_since(t_rdm);

  const auto t_cluster = Clock::now();
  const spikevis::Dendrogram dendro = spikevis::hierarchical_cluster(fm);
  const std::string dendro_path = join_path(cfg.output_dir, "dendrogram.json");
  spikevis::save_dendrogram(dendro_path, dendro, hash, cfg.seed);
  artifacts.push_back(dendro_path);
  timings["cluster"] = seconds_since(t_cluster);

  const auto t_mi = Clock::now();
  const std::vector<std::string> classes = spikevis::manifest_classes({fm.records, 0});
  std::vector<std::vector<int>> selected;
  nlohmann::json sel_json;
  sel_json["format"] = "spikevis-selected-features";
  sel_json["version"] = 1;
  sel_json["config_hash"] = hash;
  sel_json["seed"] = cfg.seed;
  sel_json["k"] = cfg.mi_k;
  for (const std::string& c : classes) {
    selected.push_back(spikevis::mi_select(fm, c, cfg.mi_k));
    sel_json["per_class"][c] = selected.back();
  }
  const std::string sel_path = join_path(cfg.output_dir, "selected_features.json");
  spikevis::detail::write_text_file(sel_path, sel_json.dump(1) + "\n");
  artifacts.push_back(sel_path);

  const spikevis::OverlapTable overlap = spikevis::feature_overlap(classes, selected);
  const std::string overlap_path = join_path(cfg.output_dir, "overlap.csv");
  spikevis::save_overlap(overlap_path, overlap, hash, cfg.seed);
  artifacts.push_back(overlap_path);
  timings["mi"] = seconds_since(t_mi);

  timings["total"] = seconds_since(t0);
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_analyze.json"), "analyze", hash,
                              cfg.seed, timings, artifacts);
  std::printf("wrote %zu analysis artifacts under %s\n", artifacts.size(),
              cfg.output_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// reconstruct

int run_reconstruct(const std::string& config_path, const std::string& prototypes_path) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  const spikevis::PrototypeFile pf = spikevis::load_prototypes(prototypes_path);
  const spikevis::GaborBank bank = spikevis::make_gabor_bank(pf.encoder);
  std::vector<std::string> artifacts;
  for (std::size_t i = 0; i < pf.prototypes.size(); ++i) {
    const spikevis::GrayImage canvas =
        spikevis::reconstruct_preferred(pf.prototypes[i], bank);
    char name[32];
    std::snprintf(name, sizeof(name), "preferred_%04zu.png", i);
    const std::string path = join_path(cfg.output_dir, name);
    spikevis::write_image(path, canvas);
    artifacts.push_back(path);
  }
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_reconstruct.json"), "reconstruct",
                              hash, cfg.seed, {{"total", seconds_since(t0)}}, artifacts);
  std::printf("wrote %zu preferred-stimulus images under %s\n", artifacts.size(),
              cfg.output_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// baseline

int run_baseline(const std::string& config_path, int count) {
  const auto t0 = Clock::now();
  const spikevis::RunConfig cfg = load_config_or_throw(config_path);
  ensure_output_dir(cfg);
  const std::string hash = spikevis::config_hash(cfg);

  const int n = count > 0 ? count : cfg.train.n_prototypes;
  const std::vector<spikevis::Prototype> protos = spikevis::random_prototypes(n, cfg.seed);
  const std::string path = join_path(cfg.output_dir, "random_prototypes.json");
  spikevis::save_prototypes(path, protos, cfg.encoder, hash, cfg.seed);
  spikevis::save_run_metadata(join_path(cfg.output_dir, "run_baseline.json"), "baseline", hash,
                              cfg.seed, {{"total", seconds_since(t0)}}, {path});
  std::printf("wrote %d random prototypes to %s\n", n, path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven spiking visual hierarchy: batch pipeline"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a synthetic shape corpus");
  cmd_synth->add_option("--out", synth.out_dir, "Output directory for images + manifest");
  cmd_synth->add_option("--classes", synth.classes, "Comma-separated shape list");
  cmd_synth->add_option("--train", synth.train_per_class, "Training images per class");
  cmd_synth->add_option("--test", synth.test_per_class, "Test images per class");
  cmd_synth->add_option("--seed", synth.seed, "Corpus seed")
      ->each([&](const std::string&) { synth.have_seed = true; });
  cmd_synth->add_option("--canvas", synth.canvas, "Canvas size in pixels");
  cmd_synth->add_option("--arm", synth.arm, "Shape arm length in pixels");
  cmd_synth->add_option("--halfwidth", synth.halfwidth, "Stroke half-width in pixels");
  cmd_synth->add_option("--clutter", synth.clutter, "Clutter strokes per image");
  cmd_synth->add_option("--noise", synth.pixel_noise, "Gaussian pixel noise sigma");
  cmd_synth->add_option("--rotation", synth.rotation_jitter, "Rotation jitter in radians");
  cmd_synth->add_option("--sizes", synth.sizes, "Comma-separated size scales");

  std::string config_path, manifest_path, prototypes_path;
  std::string split = "train";
  std::string features_out = "features.csv";
  std::string train_csv, test_csv, features_csv;
  int baseline_count = 0;

  CLI::App* cmd_train = app.add_subcommand("train", "Learn prototypes with STDP");
  cmd_train->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_train->add_option("-m,--manifest", manifest_path, "Dataset manifest")->required();
  cmd_train->add_option("--split", split, "Manifest split to train on ('' = all rows)");

  CLI::App* cmd_extract = app.add_subcommand("extract", "Compute C2 features");
  cmd_extract->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_extract->add_option("-m,--manifest", manifest_path, "Dataset manifest")->required();
  cmd_extract->add_option("-p,--prototypes", prototypes_path, "Prototype file")->required();
  cmd_extract->add_option("--split", split, "Manifest split to extract ('' = all rows)");
  cmd_extract->add_option("--out-name", features_out, "Feature CSV file name");

  CLI::App* cmd_classify = app.add_subcommand("classify", "Train and score classifiers");
  cmd_classify->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_classify->add_option("--train-features", train_csv, "Training feature CSV")->required();
  cmd_classify->add_option("--test-features", test_csv, "Held-out feature CSV");

  CLI::App* cmd_analyze = app.add_subcommand("analyze", "RDM, clustering, MI selection");
  cmd_analyze->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_analyze->add_option("--features", features_csv, "Feature CSV")->required();

  CLI::App* cmd_reconstruct =
      app.add_subcommand("reconstruct", "Render preferred stimuli of prototypes");
  cmd_reconstruct->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_reconstruct->add_option("-p,--prototypes", prototypes_path, "Prototype file")
      ->required();

  CLI::App* cmd_baseline = app.add_subcommand("baseline", "Generate random prototypes");
  cmd_baseline->add_option("-c,--config", config_path, "Run config file")->required();
  cmd_baseline->add_option("-n,--count", baseline_count,
                           "Prototype count (default: n_prototypes)");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(cmd_synth)) return run_synth(synth);
    if (app.got_subcommand(cmd_train)) return run_train(config_path, manifest_path, split);
    if (app.got_subcommand(cmd_extract)) {
      return run_extract(config_path, manifest_path, prototypes_path, split, features_out);
    }
    if (app.got_subcommand(cmd_classify)) return run_classify(config_path, train_csv, test_csv);
    if (app.got_subcommand(cmd_analyze)) return run_analyze(config_path, features_csv);
    if (app.got_subcommand(cmd_reconstruct)) {
      return run_reconstruct(config_path, prototypes_path);
    }
    if (app.got_subcommand(cmd_baseline)) return run_baseline(config_path, baseline_count);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fputs(spikevis::error_json(2, "usage", e.what()).c_str(), stderr);
    return 2;
  } catch (const spikevis::ConfigError& e) {
    std::fputs(spikevis::error_json(2, "config", e.what()).c_str(), stderr);
    return 2;
  } catch (const spikevis::InvalidInputError& e) {
    std::fputs(spikevis::error_json(2, "invalid-input", e.what()).c_str(), stderr);
    return 2;
  } catch (const spikevis::NonConvergenceError& e) {
    std::fputs(spikevis::error_json(4, "non-convergence", e.what()).c_str(), stderr);
    return 4;
  } catch (const spikevis::DataError& e) {
    std::fputs(spikevis::error_json(3, "data", e.what()).c_str(), stderr);
    return 3;
  } catch (const std::exception& e) {
    std::fputs(spikevis::error_json(1, "internal", e.what()).c_str(), stderr);
    return 1;
  }
}
