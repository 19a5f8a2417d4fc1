#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spikevis {

/// Bad arguments or malformed inputs to a library operation.
struct InvalidInputError : std::runtime_error {
  explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with run configuration files or inconsistent settings.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with dataset files (manifests, images) at runtime.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training hit the epoch cap before every prototype reached its spike target.
struct NonConvergenceError : std::runtime_error {
  explicit NonConvergenceError(const std::string& msg, std::vector<long> counts = {})
      : std::runtime_error(msg), spike_counts(std::move(counts)) {}
  std::vector<long> spike_counts;
};

}  // namespace spikevis
