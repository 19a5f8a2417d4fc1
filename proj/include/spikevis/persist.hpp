#pragma once

// Artifact persistence. Every artifact embeds the config hash and seed that
// produced it; all floating-point output uses shortest round-trip formatting
// so reruns with identical inputs are byte-identical.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikevis/analysis.hpp"
#include "spikevis/classify.hpp"
#include "spikevis/config.hpp"
#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/features.hpp"
#include "spikevis/network.hpp"

namespace spikevis {

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed for " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

inline void expect_format(const nlohmann::json& j, const std::string& path,
                          const std::string& format, int version) {
  if (!j.contains("format") || j.at("format") != format) {
    throw DataError(path + ": expected format '" + format + "'");
  }
  if (!j.contains("version") || j.at("version").get<int>() != version) {
    throw DataError(path + ": unsupported version");
  }
}

inline nlohmann::json encoder_to_json(const EncoderConfig& e) {
  return {{"gabor_sigma", e.gabor_sigma},
          {"gabor_gamma", e.gabor_gamma},
          {"gabor_phase", e.gabor_phase},
          {"response_floor", e.response_floor}};
}

inline EncoderConfig encoder_from_json(const nlohmann::json& j) {
  EncoderConfig e;
  e.gabor_sigma = j.at("gabor_sigma").get<double>();
  e.gabor_gamma = j.at("gabor_gamma").get<double>();
  e.gabor_phase = j.at("gabor_phase").get<double>();
  e.response_floor = j.at("response_floor").get<double>();
  return e;
}

inline nlohmann::json record_to_json(const ManifestRecord& r) {
  return {{"path", r.path},     {"label", r.label}, {"instance", r.instance},
          {"view", r.view},     {"scale", r.scale_tag}, {"tilt", r.tilt_tag},
          {"split", r.split}};
}

inline ManifestRecord record_from_json(const nlohmann::json& j) {
  ManifestRecord r;
  r.path = j.at("path").get<std::string>();
  r.label = j.at("label").get<std::string>();
  r.instance = j.at("instance").get<std::string>();
  r.view = j.at("view").get<std::string>();
  r.scale_tag = j.at("scale").get<std::string>();
  r.tilt_tag = j.at("tilt").get<std::string>();
  r.split = j.at("split").get<std::string>();
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Prototypes

struct PrototypeFile {
  std::vector<Prototype> prototypes;
  EncoderConfig encoder;
  std::string config_hash;
  std::uint64_t seed = 0;
};

inline void save_prototypes(const std::string& path, const std::vector<Prototype>& protos,
                            const EncoderConfig& enc, const std::string& hash,
                            std::uint64_t seed) {
  nlohmann::json j;
  j["format"] = "spikevis-prototypes";
  j["version"] = 1;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["encoder"] = detail::encoder_to_json(enc);
  j["window"] = kS2Window;
  j["orientations"] = kNumOrientations;
  nlohmann::json arr = nlohmann::json::array();
  for (const Prototype& p : protos) {
    nlohmann::json pj;
    pj["threshold"] = p.threshold;
    pj["post_spike_count"] = p.post_spike_count;
    pj["weights"] = p.weights;
    arr.push_back(std::move(pj));
  }
  j["prototypes"] = std::move(arr);
  detail::write_text_file(path, j.dump(1) + "\n");
}

inline PrototypeFile load_prototypes(const std::string& path) {
  const nlohmann::json j = detail::read_json_file(path);
  detail::expect_format(j, path, "spikevis-prototypes", 1);
  if (j.at("window").get<int>() != kS2Window ||
      j.at("orientations").get<int>() != kNumOrientations) {
    throw DataError(path + ": incompatible window geometry");
  }
  PrototypeFile out;
  out.encoder = detail::encoder_from_json(j.at("encoder"));
  out.config_hash = j.at("config_hash").get<std::string>();
  out.seed = j.at("seed").get<std::uint64_t>();
  for (const nlohmann::json& pj : j.at("prototypes")) {
    Prototype p;
    p.threshold = pj.at("threshold").get<double>();
    p.post_spike_count = pj.at("post_spike_count").get<long>();
    p.weights = pj.at("weights").get<std::vector<double>>();
    if (static_cast<int>(p.weights.size()) != kS2WeightCount) {
      throw DataError(path + ": prototype weight count != " + std::to_string(kS2WeightCount));
    }
    for (double w : p.weights) {
      if (!(w >= 0.0 && w <= 1.0)) throw DataError(path + ": weight outside [0,1]");
    }
    out.prototypes.push_back(std::move(p));
  }
  if (out.prototypes.empty()) throw DataError(path + ": no prototypes");
  return out;
}

// ---------------------------------------------------------------------------
// Feature matrices: CSV of values (header = prototype ids, first column =
// image path) plus a .meta.json sidecar with records, hash and seed.

inline void save_features_csv(const std::string& path, const FeatureMatrix& fm,
                              const std::string& hash, std::uint64_t seed) {
  std::string csv = "# config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
  csv += "path";
  for (int f = 0; f < fm.cols(); ++f) {
    char col[16];
    std::snprintf(col, sizeof(col), ",p%04d", f);
    csv += col;
  }
  csv += "\n";
  for (int i = 0; i < fm.rows(); ++i) {
    csv += fm.records[static_cast<std::size_t>(i)].path;
    for (double v : fm.values[static_cast<std::size_t>(i)]) {
      csv += ",";
      csv += format_double(v);
    }
    csv += "\n";
  }
  detail::write_text_file(path, csv);

  nlohmann::json meta;
  meta["format"] = "spikevis-features-meta";
  meta["version"] = 1;
  meta["config_hash"] = hash;
  meta["seed"] = seed;
  nlohmann::json recs = nlohmann::json::array();
  for (const ManifestRecord& r : fm.records) recs.push_back(detail::record_to_json(r));
  meta["records"] = std::move(recs);
  detail::write_text_file(path + ".meta.json", meta.dump(1) + "\n");
}

inline FeatureMatrix load_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  FeatureMatrix fm;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column names are positional: path,p0000,...
      continue;
    }
    std::vector<double> row;
    std::size_t pos = line.find(',');
    if (pos == std::string::npos) throw DataError(path + ": malformed CSV row");
    std::size_t start = pos + 1;
    while (start <= line.size()) {
      std::size_t next = line.find(',', start);
      const std::string cell =
          line.substr(start, next == std::string::npos ? std::string::npos : next - start);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw DataError(path + ": bad number '" + cell + "'");
      row.push_back(v);
      if (next == std::string::npos) break;
      start = next + 1;
    }
    fm.values.push_back(std::move(row));
  }
  const nlohmann::json meta = detail::read_json_file(path + ".meta.json");
  detail::expect_format(meta, path + ".meta.json", "spikevis-features-meta", 1);
  for (const nlohmann::json& rj : meta.at("records")) {
    fm.records.push_back(detail::record_from_json(rj));
  }
  if (fm.records.size() != fm.values.size()) {
    throw DataError(path + ": row count differs from sidecar record count");
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Classifier models

inline void save_simple_model(const std::string& path, const SimpleClassifierModel& m,
                              const std::string& hash, std::uint64_t seed) {
  nlohmann::json j;
  j["format"] = "spikevis-simple-model";
  j["version"] = 1;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["classes"] = m.classes;
  j["binarize_threshold"] = m.binarize_threshold;
  nlohmann::json pairs = nlohmann::json::array();
  for (const SimplePairModel& pm : m.pairs) {
    pairs.push_back({{"class_a", pm.class_a},
                     {"class_b", pm.class_b},
                     {"ratio_threshold", pm.ratio_threshold},
                     {"features_a", pm.features_a},
                     {"features_b", pm.features_b},
                     {"prob_a", pm.prob_a},
                     {"prob_b", pm.prob_b},
                     {"degenerate", pm.degenerate}});
  }
  j["pairs"] = std::move(pairs);
  detail::write_text_file(path, j.dump(1) + "\n");
}

inline SimpleClassifierModel load_simple_model(const std::string& path) {
  const nlohmann::json j = detail::read_json_file(path);
  detail::expect_format(j, path, "spikevis-simple-model", 1);
  SimpleClassifierModel m;
  m.classes = j.at("classes").get<std::vector<std::string>>();
  m.binarize_threshold = j.at("binarize_threshold").get<std::vector<double>>();
  for (const nlohmann::json& pj : j.at("pairs")) {
    SimplePairModel pm;
    pm.class_a = pj.at("class_a").get<int>();
    pm.class_b = pj.at("class_b").get<int>();
    pm.ratio_threshold = pj.at("ratio_threshold").get<double>();
    pm.features_a = pj.at("features_a").get<std::vector<int>>();
    pm.features_b = pj.at("features_b").get<std::vector<int>>();
    pm.prob_a = pj.at("prob_a").get<std::vector<double>>();
    pm.prob_b = pj.at("prob_b").get<std::vector<double>>();
    pm.degenerate = pj.at("degenerate").get<bool>();
    m.pairs.push_back(std::move(pm));
  }
  return m;
}

inline void save_linear_model(const std::string& path, const LinearOvOModel& m,
                              const std::string& hash, std::uint64_t seed) {
  nlohmann::json j;
  j["format"] = "spikevis-linear-model";
  j["version"] = 1;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["classes"] = m.classes;
  j["mean"] = m.mean;
  j["inv_std"] = m.inv_std;
  nlohmann::json pairs = nlohmann::json::array();
  for (const LinearPairModel& pm : m.pairs) {
    pairs.push_back({{"class_a", pm.class_a},
                     {"class_b", pm.class_b},
                     {"w", pm.w},
                     {"bias", pm.bias}});
  }
  j["pairs"] = std::move(pairs);
  detail::write_text_file(path, j.dump(1) + "\n");
}

inline LinearOvOModel load_linear_model(const std::string& path) {
  const nlohmann::json j = detail::read_json_file(path);
  detail::expect_format(j, path, "spikevis-linear-model", 1);
  LinearOvOModel m;
  m.classes = j.at("classes").get<std::vector<std::string>>();
  m.mean = j.at("mean").get<std::vector<double>>();
  m.inv_std = j.at("inv_std").get<std::vector<double>>();
  for (const nlohmann::json& pj : j.at("pairs")) {
    LinearPairModel pm;
    pm.class_a = pj.at("class_a").get<int>();
    pm.class_b = pj.at("class_b").get<int>();
    pm.w = pj.at("w").get<std::vector<double>>();
    pm.bias = pj.at("bias").get<double>();
    m.pairs.push_back(std::move(pm));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Analysis outputs

/// CSV of the matrix plus a JSON sidecar carrying row ordering and the index
/// where each class's block starts (for external color-coded rendering).
inline void save_rdm(const std::string& path, const Rdm& r, const std::string& hash,
                     std::uint64_t seed) {
  std::string csv = "# config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
  for (int i = 0; i < r.size(); ++i) {
    for (int j = 0; j < r.size(); ++j) {
      if (j) csv += ",";
      csv += format_double(r.d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    csv += "\n";
  }
  detail::write_text_file(path, csv);

  nlohmann::json meta;
  meta["format"] = "spikevis-rdm-meta";
  meta["version"] = 1;
  meta["config_hash"] = hash;
  meta["seed"] = seed;
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json boundaries = nlohmann::json::array();
  std::string prev_class;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    rows.push_back(detail::record_to_json(r.records[i]));
    if (r.records[i].label != prev_class) {
      boundaries.push_back({{"class", r.records[i].label}, {"first_row", i}});
      prev_class = r.records[i].label;
    }
  }
  meta["rows"] = std::move(rows);
  meta["class_boundaries"] = std::move(boundaries);
  meta["zero_variance_rows"] = r.zero_variance_rows;
  detail::write_text_file(path + ".meta.json", meta.dump(1) + "\n");
}

inline void save_dendrogram(const std::string& path, const Dendrogram& d,
                            const std::string& hash, std::uint64_t seed) {
  nlohmann::json j;
  j["format"] = "spikevis-dendrogram";
  j["version"] = 1;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["n_leaves"] = d.n_leaves;
  j["leaf_labels"] = d.leaf_labels;
  nlohmann::json merges = nlohmann::json::array();
  for (const DendrogramMerge& m : d.merges) {
    merges.push_back({{"id", m.id},
                      {"left", m.left},
                      {"right", m.right},
                      {"distance", m.distance},
                      {"majority_label", m.majority_label},
                      {"H", m.h},
                      {"C", m.c}});
  }
  j["merges"] = std::move(merges);
  detail::write_text_file(path, j.dump(1) + "\n");
}

/// Class-by-class table of shared top-k feature counts.
inline void save_overlap(const std::string& path, const OverlapTable& t,
                         const std::string& hash, std::uint64_t seed) {
  std::string csv = "# config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
  csv += "class";
  for (const std::string& c : t.classes) csv += "," + c;
  csv += "\n";
  for (std::size_t a = 0; a < t.classes.size(); ++a) {
    csv += t.classes[a];
    for (std::size_t b = 0; b < t.classes.size(); ++b) {
      csv += "," + std::to_string(t.common[a][b]);
    }
    csv += "\n";
  }
  detail::write_text_file(path, csv);
}

// ---------------------------------------------------------------------------
// Run metadata: the one artifact allowed to differ between reruns (timings).

inline void save_run_metadata(const std::string& path, const std::string& command,
                              const std::string& hash, std::uint64_t seed,
                              const std::map<std::string, double>& timings_seconds,
                              const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["format"] = "spikevis-run-metadata";
  j["version"] = 1;
  j["command"] = command;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["timings_seconds"] = timings_seconds;
  j["artifacts"] = artifacts;
  detail::write_text_file(path, j.dump(1) + "\n");
}

/// Machine-readable error payload printed by the CLI on failure.
inline std::string error_json(int exit_code, const std::string& kind,
                              const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"exit_code", exit_code}, {"kind", kind}, {"message", message}};
  return j.dump() + "\n";
}

}  // namespace spikevis
