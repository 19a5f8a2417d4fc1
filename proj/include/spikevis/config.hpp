#pragma once

// Run configuration: a flat key-value text file (one "key = value" per line,
// '#' comments) plus a canonical FNV-1a hash embedded into every artifact a
// run produces.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <system_error>

#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/learning.hpp"

namespace spikevis {

/// Shortest round-trip decimal form of a double; integral values keep a
/// trailing ".0" so the column type stays visible.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

struct RunConfig {
  std::uint64_t seed = 0;  // mandatory in config files
  EncoderConfig encoder;
  TrainConfig train;  // train.rng_seed mirrors seed
  std::string classifier = "both";  // simple | linear | both
  int mi_k = 50;
  int linear_epochs = 200;
  double linear_lambda = 1e-4;
  std::string output_dir = ".";
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
  }
  return out;
}

inline long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config: bad unsigned value for " + key + ": '" + v + "'");
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  bool have_seed = false;
  for (const auto& [key, value] : kv) {
    if (key == "seed") {
      cfg.seed = detail::parse_u64(key, value);
      have_seed = true;
    } else if (key == "gabor_sigma") {
      cfg.encoder.gabor_sigma = detail::parse_double(key, value);
    } else if (key == "gabor_gamma") {
      cfg.encoder.gabor_gamma = detail::parse_double(key, value);
    } else if (key == "gabor_phase") {
      cfg.encoder.gabor_phase = detail::parse_double(key, value);
    } else if (key == "response_floor") {
      cfg.encoder.response_floor = detail::parse_double(key, value);
    } else if (key == "n_prototypes") {
      cfg.train.n_prototypes = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "target_spikes") {
      cfg.train.target_spikes = detail::parse_long(key, value);
    } else if (key == "k_wta") {
      cfg.train.k_wta = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "inhibition_radius") {
      cfg.train.inhibition_radius = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "max_epochs") {
      cfg.train.max_epochs = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "cache_waves") {
      if (value != "0" && value != "1" && value != "true" && value != "false") {
        throw ConfigError("config: cache_waves must be 0/1/true/false");
      }
      cfg.train.cache_waves = value == "1" || value == "true";
    } else if (key == "classifier") {
      if (value != "simple" && value != "linear" && value != "both") {
        throw ConfigError("config: classifier must be simple, linear or both");
      }
      cfg.classifier = value;
    } else if (key == "mi_k") {
      cfg.mi_k = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "linear_epochs") {
      cfg.linear_epochs = static_cast<int>(detail::parse_long(key, value));
    } else if (key == "linear_lambda") {
      cfg.linear_lambda = detail::parse_double(key, value);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!have_seed) throw ConfigError("config: seed is required");
  cfg.train.rng_seed = cfg.seed;
  if (cfg.train.n_prototypes < 1) throw ConfigError("config: n_prototypes must be >= 1");
  if (cfg.train.target_spikes < 1) throw ConfigError("config: target_spikes must be >= 1");
  if (cfg.train.k_wta < 1) throw ConfigError("config: k_wta must be >= 1");
  if (cfg.train.inhibition_radius < 0) {
    throw ConfigError("config: inhibition_radius must be >= 0");
  }
  if (cfg.train.max_epochs < 1) throw ConfigError("config: max_epochs must be >= 1");
  if (cfg.mi_k < 1) throw ConfigError("config: mi_k must be >= 1");
  if (cfg.linear_epochs < 1) throw ConfigError("config: linear_epochs must be >= 1");
  if (cfg.linear_lambda <= 0) throw ConfigError("config: linear_lambda must be > 0");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](const std::string& s) {
      const std::size_t b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      const std::size_t e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        " expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + " empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "' in " + path);
    }
  }
  return parse_run_config(kv);
}

/// Canonical text form: every knob, sorted by key, values normalized. Two
/// configs hash equal iff this string is equal.
inline std::string canonical_config_string(const RunConfig& c) {
  std::string s;
  s += "cache_waves=" + std::string(c.train.cache_waves ? "1" : "0") + "\n";
  s += "classifier=" + c.classifier + "\n";
  s += "gabor_gamma=" + format_double(c.encoder.gabor_gamma) + "\n";
  s += "gabor_phase=" + format_double(c.encoder.gabor_phase) + "\n";
  s += "gabor_sigma=" + format_double(c.encoder.gabor_sigma) + "\n";
  s += "inhibition_radius=" + std::to_string(c.train.inhibition_radius) + "\n";
  s += "k_wta=" + std::to_string(c.train.k_wta) + "\n";
  s += "linear_epochs=" + std::to_string(c.linear_epochs) + "\n";
  s += "linear_lambda=" + format_double(c.linear_lambda) + "\n";
  s += "max_epochs=" + std::to_string(c.train.max_epochs) + "\n";
  s += "mi_k=" + std::to_string(c.mi_k) + "\n";
  s += "n_prototypes=" + std::to_string(c.train.n_prototypes) + "\n";
  s += "response_floor=" + format_double(c.encoder.response_floor) + "\n";
  s += "seed=" + std::to_string(c.seed) + "\n";
  s += "target_spikes=" + std::to_string(c.train.target_spikes) + "\n";
  return s;
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& c) {
  const std::uint64_t h = fnv1a64(canonical_config_string(c));
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xF];
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace spikevis
