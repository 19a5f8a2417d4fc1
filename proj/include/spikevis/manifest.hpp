#pragma once

// Dataset manifests: one record per image with class label, instance id and
// pose tags. Accepted encodings are CSV with a header row and JSON-lines;
// both may start with "# key=value" pragma lines (currently resize_height).

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spikevis/error.hpp"
#include "spikevis/rng.hpp"

namespace spikevis {

struct ManifestRecord {
  std::string path;
  std::string label;     // class label
  std::string instance;  // instance id within the class
  std::string view;
  std::string scale_tag;
  std::string tilt_tag;
  std::string split;  // "train", "test", or empty when not yet assigned

  bool operator==(const ManifestRecord&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  int resize_height = 0;  // 0 keeps original image sizes

  bool operator==(const DatasetManifest&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline void apply_pragma(DatasetManifest& m, const std::string& line) {
  // "# key=value"; unknown keys are ignored so manifests stay extensible.
  std::string body = trim(line.substr(1));
  std::size_t eq = body.find('=');
  if (eq == std::string::npos) return;
  std::string key = trim(body.substr(0, eq));
  std::string value = trim(body.substr(eq + 1));
  if (key == "resize_height") {
    try {
      m.resize_height = std::stoi(value);
    } catch (const std::exception&) {
      throw DataError("manifest: bad resize_height value '" + value + "'");
    }
    if (m.resize_height < 0) throw DataError("manifest: resize_height must be >= 0");
  }
}

inline void validate_manifest(const DatasetManifest& m) {
  std::set<std::string> paths;
  // class -> instance -> set of splits seen
  std::map<std::string, std::map<std::string, std::set<std::string>>> seen;
  for (const ManifestRecord& r : m.records) {
    if (r.path.empty()) throw DataError("manifest: record with empty path");
    if (r.label.empty()) throw DataError("manifest: " + r.path + " has no class label");
    if (r.instance.empty()) throw DataError("manifest: " + r.path + " has no instance id");
    if (!r.split.empty() && r.split != "train" && r.split != "test") {
      throw DataError("manifest: " + r.path + " has unknown split '" + r.split + "'");
    }
    if (!paths.insert(r.path).second) {
      throw DataError("manifest: duplicate path " + r.path);
    }
    if (!r.split.empty()) seen[r.label][r.instance].insert(r.split);
  }
  for (const auto& [label, instances] : seen) {
    for (const auto& [instance, splits] : instances) {
      if (splits.size() > 1) {
        throw DataError("manifest: instance '" + instance + "' of class '" + label +
                        "' appears in both train and test splits");
      }
    }
  }
}

}  // namespace detail

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  DatasetManifest m;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      detail::apply_pragma(m, line);
      continue;
    }
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError("manifest: " + path + " has no records");

  if (lines.front().front() == '{') {
    // JSON-lines: one object per line.
    for (const std::string& l : lines) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(l);
      } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest: bad JSON line in " + path + ": " + e.what());
      }
      auto str = [&j](const char* key) {
        return j.contains(key) ? j.at(key).get<std::string>() : std::string();
      };
      ManifestRecord r;
      r.path = str("path");
      r.label = str("label");
      r.instance = str("instance");
      r.view = str("view");
      r.scale_tag = str("scale");
      r.tilt_tag = str("tilt");
      r.split = str("split");
      m.records.push_back(std::move(r));
    }
  } else {
    // CSV with a header row naming the columns; order is free.
    std::vector<std::string> header = detail::split_csv_line(lines.front());
    auto col = [&header](const std::string& name) -> int {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int c_path = col("path"), c_label = col("label"), c_instance = col("instance");
    const int c_view = col("view"), c_scale = col("scale"), c_tilt = col("tilt");
    const int c_split = col("split");
    if (c_path < 0 || c_label < 0 || c_instance < 0) {
      throw DataError("manifest: " + path + " header must name path, label and instance");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::vector<std::string> f = detail::split_csv_line(lines[i]);
      auto get = [&f](int c) {
        return c >= 0 && c < static_cast<int>(f.size()) ? f[c] : std::string();
      };
      ManifestRecord r;
      r.path = get(c_path);
      r.label = get(c_label);
      r.instance = get(c_instance);
      r.view = get(c_view);
      r.scale_tag = get(c_scale);
      r.tilt_tag = get(c_tilt);
      r.split = get(c_split);
      m.records.push_back(std::move(r));
    }
  }
  detail::validate_manifest(m);
  return m;
}

inline void save_manifest_csv(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw DataError("manifest: cannot write " + path);
  if (m.resize_height > 0) out << "# resize_height=" << m.resize_height << "\n";
  out << "path,label,instance,view,scale,tilt,split\n";
  for (const ManifestRecord& r : m.records) {
    out << r.path << ',' << r.label << ',' << r.instance << ',' << r.view << ','
        << r.scale_tag << ',' << r.tilt_tag << ',' << r.split << "\n";
  }
}

/// Distinct class labels in order of first appearance.
inline std::vector<std::string> manifest_classes(const DatasetManifest& m) {
  std::vector<std::string> classes;
  for (const ManifestRecord& r : m.records) {
    if (std::find(classes.begin(), classes.end(), r.label) == classes.end()) {
      classes.push_back(r.label);
    }
  }
  return classes;
}

inline DatasetManifest filter_split(const DatasetManifest& m, const std::string& split) {
  DatasetManifest out;
  out.resize_height = m.resize_height;
  for (const ManifestRecord& r : m.records) {
    if (r.split == split) out.records.push_back(r);
  }
  return out;
}

/// Assigns a seeded per-class choice of n_train_instances instance ids to the
/// train split; every other instance goes to test. All images of an instance
/// travel together. Each class must have strictly more instances than
/// n_train_instances.
inline std::pair<DatasetManifest, DatasetManifest> split_by_instance(
    const DatasetManifest& manifest, int n_train_instances, std::uint64_t seed) {
  if (n_train_instances < 1) {
    throw InvalidInputError("split_by_instance: n_train_instances must be >= 1");
  }
  std::map<std::string, std::vector<std::string>> class_instances;
  for (const ManifestRecord& r : manifest.records) {
    auto& v = class_instances[r.label];
    if (std::find(v.begin(), v.end(), r.instance) == v.end()) v.push_back(r.instance);
  }
  // Sorted class and instance order makes the split a function of (contents,
  // seed) alone, not of record order.
  std::map<std::string, std::set<std::string>> train_ids;
  Rng rng(seed);
  for (auto& [label, instances] : class_instances) {
    if (static_cast<int>(instances.size()) <= n_train_instances) {
      throw DataError("split_by_instance: class '" + label + "' has only " +
                      std::to_string(instances.size()) + " instances, need more than " +
                      std::to_string(n_train_instances));
    }
    std::sort(instances.begin(), instances.end());
    shuffle_vec(instances, rng);
    train_ids[label] =
        std::set<std::string>(instances.begin(), instances.begin() + n_train_instances);
  }
  DatasetManifest train, test;
  train.resize_height = test.resize_height = manifest.resize_height;
  for (ManifestRecord r : manifest.records) {
    const bool is_train = train_ids[r.label].count(r.instance) > 0;
    r.split = is_train ? "train" : "test";
    (is_train ? train : test).records.push_back(std::move(r));
  }
  return {std::move(train), std::move(test)};
}

}  // namespace spikevis
