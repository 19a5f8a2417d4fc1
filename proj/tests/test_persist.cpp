#include <catch2/catch_amalgamated.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "oracles.hpp"
#include "spikevis/config.hpp"
#include "spikevis/persist.hpp"
#include "spikevis/rng.hpp"

using namespace spikevis;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& name) : dir(name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

double reparse(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("format_double is shortest round-trip with a visible decimal point", "[persist]") {
  REQUIRE(format_double(1.0) == "1.0");
  REQUIRE(format_double(0.0) == "0.0");
  REQUIRE(format_double(-3.0) == "-3.0");
  REQUIRE(format_double(0.5) == "0.5");
  REQUIRE(format_double(64.0) == "64.0");
  Rng rng(404);
  for (int i = 0; i < 2000; ++i) {
    double v = (uniform_double(rng) - 0.5) * std::pow(10.0, int(uniform_below(rng, 40)) - 20);
    if (i % 7 == 0) v = std::floor(v * 100);
    const std::string s = format_double(v);
    REQUIRE(reparse(s) == v);
    // A decimal point or exponent is always present.
    REQUIRE((s.find('.') != std::string::npos || s.find('e') != std::string::npos));
  }
  for (double v : {1.0 / 3.0, 1e-15, 0x1p-60, 123456.789, 1e17, 2.2250738585072014e-308}) {
    REQUIRE(reparse(format_double(v)) == v);
  }
}

TEST_CASE("fnv1a64 matches the published test vectors", "[persist]") {
  REQUIRE(fnv1a64("") == 0xcbf29ce484222325ULL);
  REQUIRE(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  REQUIRE(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config hash covers every knob except the output directory", "[persist]") {
  RunConfig base;
  base.seed = 11;
  const std::string h0 = config_hash(base);
  REQUIRE(h0.size() == 16);
  REQUIRE(h0.find_first_not_of("0123456789abcdef") == std::string::npos);
  REQUIRE(config_hash(base) == h0);  // pure function

  RunConfig moved = base;
  moved.output_dir = "/somewhere/else";
  REQUIRE(config_hash(moved) == h0);
  REQUIRE(canonical_config_string(base).find("output_dir") == std::string::npos);

  // Each knob perturbs the hash.
  auto perturbed = [&](auto&& mutate) {
    RunConfig c = base;
    mutate(c);
    return config_hash(c);
  };
  REQUIRE(perturbed([](RunConfig& c) { c.seed = 12; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.encoder.gabor_sigma = 2.5; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.encoder.response_floor = 0.3; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.train.n_prototypes = 9; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.train.target_spikes = 601; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.classifier = "linear"; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.mi_k = 51; }) != h0);
  REQUIRE(perturbed([](RunConfig& c) { c.linear_lambda = 1e-3; }) != h0);

  // The canonical form is sorted line-by-line.
  const std::string canon = canonical_config_string(base);
  std::vector<std::string> lines;
  for (std::size_t p = 0; p < canon.size();) {
    const std::size_t nl = canon.find('\n', p);
    lines.push_back(canon.substr(p, nl - p));
    p = nl + 1;
  }
  REQUIRE(std::is_sorted(lines.begin(), lines.end()));
}

TEST_CASE("run config files parse with comments, whitespace and validation", "[persist]") {
  TempDir td("persist_cfg_tmp");
  auto write_cfg = [&](const std::string& body) {
    const std::string p = td / "run.cfg";
    std::ofstream(p) << body;
    return p;
  };
  const RunConfig cfg = load_run_config(write_cfg(
      "# encoder knobs\n"
      "seed = 42\n"
      "  gabor_sigma=2.5   # inline comment\n"
      "n_prototypes = 6\n"
      "\n"
      "classifier = linear\n"));
  REQUIRE(cfg.seed == 42);
  REQUIRE(cfg.encoder.gabor_sigma == 2.5);
  REQUIRE(cfg.train.n_prototypes == 6);
  REQUIRE(cfg.train.rng_seed == 42);  // mirrors seed
  REQUIRE(cfg.classifier == "linear");
  REQUIRE(cfg.mi_k == 50);  // untouched default

  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nturbo=9\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nseed=2\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("mi_k=3\n")), ConfigError);  // no seed
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nmi_k=zero\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nmi_k=0\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nclassifier=forest\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\njust a line\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(write_cfg("seed=1\nlinear_lambda=0\n")), ConfigError);
  REQUIRE_THROWS_AS(load_run_config(td / "missing.cfg"), ConfigError);
}

TEST_CASE("prototype files round-trip bit for bit", "[persist]") {
  TempDir td("persist_proto_tmp");
  Rng rng(7);
  std::vector<Prototype> protos(3);
  for (Prototype& p : protos) {
    for (double& w : p.weights) w = uniform_double(rng);
    p.post_spike_count = static_cast<long>(uniform_below(rng, 1000));
  }
  EncoderConfig enc;
  enc.response_floor = 0.25;
  const std::string path = td / "protos.json";
  save_prototypes(path, protos, enc, "deadbeef00000000", 99);

  const PrototypeFile loaded = load_prototypes(path);
  REQUIRE(loaded.prototypes.size() == 3);
  REQUIRE(loaded.config_hash == "deadbeef00000000");
  REQUIRE(loaded.seed == 99);
  REQUIRE(loaded.encoder.response_floor == 0.25);
  REQUIRE(loaded.encoder.gabor_sigma == enc.gabor_sigma);
  for (std::size_t i = 0; i < protos.size(); ++i) {
    REQUIRE(loaded.prototypes[i].weights == protos[i].weights);
    REQUIRE(loaded.prototypes[i].threshold == protos[i].threshold);
    REQUIRE(loaded.prototypes[i].post_spike_count == protos[i].post_spike_count);
  }

  // Saving again produces identical bytes (reruns must be reproducible).
  const std::string path2 = td / "protos2.json";
  save_prototypes(path2, protos, enc, "deadbeef00000000", 99);
  REQUIRE(oracle::files_identical(path, path2));
}

TEST_CASE("prototype files reject corrupted payloads", "[persist]") {
  TempDir td("persist_protobad_tmp");
  auto write_json = [&](const std::string& name, nlohmann::json j) {
    const std::string p = td / name;
    std::ofstream(p) << j.dump(1);
    return p;
  };
  std::vector<Prototype> one(1);
  const std::string good = td / "good.json";
  save_prototypes(good, one, EncoderConfig{}, "e", 1);
  nlohmann::json j = nlohmann::json::parse(std::ifstream(good));

  nlohmann::json wrong_format = j;
  wrong_format["format"] = "somebody-elses-file";
  REQUIRE_THROWS_AS(load_prototypes(write_json("a.json", wrong_format)), DataError);

  nlohmann::json wrong_version = j;
  wrong_version["version"] = 2;
  REQUIRE_THROWS_AS(load_prototypes(write_json("b.json", wrong_version)), DataError);

  nlohmann::json wrong_window = j;
  wrong_window["window"] = 12;
  REQUIRE_THROWS_AS(load_prototypes(write_json("c.json", wrong_window)), DataError);

  nlohmann::json short_weights = j;
  short_weights["prototypes"][0]["weights"] = std::vector<double>(10, 0.5);
  REQUIRE_THROWS_AS(load_prototypes(write_json("d.json", short_weights)), DataError);

  nlohmann::json bad_weight = j;
  bad_weight["prototypes"][0]["weights"][3] = 1.5;
  REQUIRE_THROWS_AS(load_prototypes(write_json("e.json", bad_weight)), DataError);

  nlohmann::json empty = j;
  empty["prototypes"] = nlohmann::json::array();
  REQUIRE_THROWS_AS(load_prototypes(write_json("f.json", empty)), DataError);

  const std::string not_json = td / "g.json";
  std::ofstream(not_json) << "this is not json";
  REQUIRE_THROWS_AS(load_prototypes(not_json), DataError);
  REQUIRE_THROWS_AS(load_prototypes(td / "absent.json"), DataError);
}

TEST_CASE("feature matrices round-trip through CSV plus sidecar", "[persist]") {
  TempDir td("persist_feat_tmp");
  FeatureMatrix fm;
  Rng rng(3);
  const std::vector<double> specials = {0.0, 1.0, 1.0 / 3.0, 1e-15, 0x1p-60, 123456.789};
  for (int i = 0; i < 5; ++i) {
    ManifestRecord r;
    r.path = "img_" + std::to_string(i) + ".png";
    r.label = i % 2 ? "odd" : "even";
    r.instance = std::to_string(i);
    r.view = "v0";
    r.scale_tag = "s100";
    r.split = i < 3 ? "train" : "test";
    fm.records.push_back(r);
    std::vector<double> row = specials;
    for (int f = 0; f < 4; ++f) row.push_back(uniform_double(rng) * 50.0);
    fm.values.push_back(std::move(row));
  }
  const std::string path = td / "features.csv";
  save_features_csv(path, fm, "cafe000000000000", 5);
  REQUIRE(fs::exists(path + ".meta.json"));
  REQUIRE(oracle::slurp(path).rfind("# config_hash=cafe000000000000 seed=5", 0) == 0);

  const FeatureMatrix back = load_features_csv(path);
  REQUIRE(back.records == fm.records);
  REQUIRE(back.values == fm.values);  // shortest round-trip: exact doubles

  // A CSV row without a matching sidecar record is rejected.
  std::ofstream(path, std::ios::app) << "extra.png,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0\n";
  REQUIRE_THROWS_AS(load_features_csv(path), DataError);
  REQUIRE_THROWS_AS(load_features_csv(td / "nope.csv"), DataError);
}

TEST_CASE("classifier models round-trip", "[persist]") {
  TempDir td("persist_model_tmp");
  SimpleClassifierModel sm;
  sm.classes = {"ant", "bee"};
  sm.binarize_threshold = {0.5, 2.25, 0.0};
  SimplePairModel pm;
  pm.class_a = 0;
  pm.class_b = 1;
  pm.ratio_threshold = 3.0;
  pm.features_a = {0, 2};
  pm.features_b = {1};
  pm.prob_a = {0.75, 1.0 / 3.0};
  pm.prob_b = {0.125};
  sm.pairs.push_back(pm);
  const std::string spath = td / "simple.json";
  save_simple_model(spath, sm, "hash", 1);
  const SimpleClassifierModel sback = load_simple_model(spath);
  REQUIRE(sback.classes == sm.classes);
  REQUIRE(sback.binarize_threshold == sm.binarize_threshold);
  REQUIRE(sback.pairs.size() == 1);
  REQUIRE(sback.pairs[0].features_a == pm.features_a);
  REQUIRE(sback.pairs[0].prob_a == pm.prob_a);
  REQUIRE(sback.pairs[0].prob_b == pm.prob_b);
  REQUIRE(sback.pairs[0].ratio_threshold == 3.0);
  REQUIRE(sback.pairs[0].degenerate == false);

  LinearOvOModel lm;
  lm.classes = {"ant", "bee", "cow"};
  lm.mean = {0.5, -2.0};
  lm.inv_std = {1.0, 0.25};
  for (int p = 0; p < 3; ++p) {
    LinearPairModel lp;
    lp.class_a = p == 2 ? 1 : 0;
    lp.class_b = p == 0 ? 1 : 2;
    lp.w = {0.1 * p, -0.33, 1.0 / 7.0};
    lp.bias = -0.01 * p;
    lm.pairs.push_back(lp);
  }
  const std::string lpath = td / "linear.json";
  save_linear_model(lpath, lm, "hash", 1);
  const LinearOvOModel lback = load_linear_model(lpath);
  REQUIRE(lback.classes == lm.classes);
  REQUIRE(lback.mean == lm.mean);
  REQUIRE(lback.inv_std == lm.inv_std);
  REQUIRE(lback.pairs.size() == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    REQUIRE(lback.pairs[p].w == lm.pairs[p].w);
    REQUIRE(lback.pairs[p].bias == lm.pairs[p].bias);
    REQUIRE(lback.pairs[p].class_a == lm.pairs[p].class_a);
    REQUIRE(lback.pairs[p].class_b == lm.pairs[p].class_b);
  }

  // Format tags are not interchangeable between model kinds.
  REQUIRE_THROWS_AS(load_simple_model(lpath), DataError);
  REQUIRE_THROWS_AS(load_linear_model(spath), DataError);
}

TEST_CASE("analysis artifacts carry ordering and provenance", "[persist]") {
  TempDir td("persist_analysis_tmp");
  Rdm r;
  r.d = {{0.0, 0.5, 1.0}, {0.5, 0.0, 0.25}, {1.0, 0.25, 0.0}};
  for (int i = 0; i < 3; ++i) {
    ManifestRecord rec;
    rec.path = "p" + std::to_string(i);
    rec.label = i < 2 ? "apple" : "pear";
    rec.instance = std::to_string(i);
    r.records.push_back(rec);
  }
  r.zero_variance_rows = {2};
  const std::string rpath = td / "rdm.csv";
  save_rdm(rpath, r, "h", 9);
  const std::string csv = oracle::slurp(rpath);
  REQUIRE(csv.rfind("# config_hash=h seed=9", 0) == 0);
  REQUIRE(csv.find("0.0,0.5,1.0") != std::string::npos);
  const nlohmann::json meta = nlohmann::json::parse(std::ifstream(rpath + ".meta.json"));
  REQUIRE(meta.at("rows").size() == 3);
  REQUIRE(meta.at("class_boundaries").size() == 2);
  REQUIRE(meta.at("class_boundaries")[0].at("class") == "apple");
  REQUIRE(meta.at("class_boundaries")[1].at("first_row") == 2);
  REQUIRE(meta.at("zero_variance_rows").get<std::vector<int>>() == std::vector<int>{2});

  Dendrogram d;
  d.n_leaves = 2;
  d.leaf_labels = {"apple", "pear"};
  DendrogramMerge m;
  m.id = 2;
  m.left = 0;
  m.right = 1;
  m.distance = 0.75;
  m.majority_label = "apple";
  m.h = 1;
  m.c = 2;
  d.merges.push_back(m);
  const std::string dpath = td / "dendrogram.json";
  save_dendrogram(dpath, d, "h", 9);
  const nlohmann::json dj = nlohmann::json::parse(std::ifstream(dpath));
  REQUIRE(dj.at("format") == "spikevis-dendrogram");
  REQUIRE(dj.at("n_leaves") == 2);
  REQUIRE(dj.at("merges")[0].at("distance") == 0.75);
  REQUIRE(dj.at("merges")[0].at("majority_label") == "apple");
  REQUIRE(dj.at("merges")[0].at("H") == 1);
  REQUIRE(dj.at("merges")[0].at("C") == 2);

  OverlapTable t;
  t.classes = {"apple", "pear"};
  t.common = {{5, 2}, {2, 5}};
  t.k = 5;
  const std::string opath = td / "overlap.csv";
  save_overlap(opath, t, "h", 9);
  const std::string ocsv = oracle::slurp(opath);
  REQUIRE(ocsv.find("class,apple,pear") != std::string::npos);
  REQUIRE(ocsv.find("apple,5,2") != std::string::npos);
  REQUIRE(ocsv.find("pear,2,5") != std::string::npos);

  save_run_metadata(td / "run.json", "train", "h", 9, {{"total", 1.25}},
                    {"protos.json"});
  const nlohmann::json rj = nlohmann::json::parse(std::ifstream(td / "run.json"));
  REQUIRE(rj.at("command") == "train");
  REQUIRE(rj.at("timings_seconds").at("total") == 1.25);
  REQUIRE(rj.at("artifacts").get<std::vector<std::string>>() ==
          std::vector<std::string>{"protos.json"});
}

TEST_CASE("error payloads are single-line JSON with code, kind and message", "[persist]") {
  const std::string s = error_json(3, "data", "missing manifest");
  REQUIRE(s.back() == '\n');
  REQUIRE(s.find('\n') == s.size() - 1);
  const nlohmann::json j = nlohmann::json::parse(s);
  REQUIRE(j.at("error").at("exit_code") == 3);
  REQUIRE(j.at("error").at("kind") == "data");
  REQUIRE(j.at("error").at("message") == "missing manifest");
}
