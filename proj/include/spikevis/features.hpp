#pragma once

// C2 feature extraction over datasets, the random-prototype baseline, and
// preferred-stimulus reconstruction.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/image_io.hpp"
#include "spikevis/manifest.hpp"
#include "spikevis/network.hpp"
#include "spikevis/rng.hpp"
#include "spikevis/train.hpp"

namespace spikevis {

/// Per-image C2 potentials with the originating manifest records kept
/// alongside (labels and pose tags drive classification and analysis).
struct FeatureMatrix {
  std::vector<std::vector<double>> values;  // rows = images, cols = prototypes
  std::vector<ManifestRecord> records;      // aligned with rows

  int rows() const { return static_cast<int>(values.size()); }
  int cols() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  const std::string& label(int i) const { return records[static_cast<std::size_t>(i)].label; }
};

/// One C2 feature row per manifest record. Unreadable images are collected
/// and reported together after the full pass so one bad file doesn't hide
/// later ones.
inline FeatureMatrix extract_features(const DatasetManifest& manifest,
                                      const std::vector<Prototype>& prototypes,
                                      const EncoderConfig& enc = {}) {
  if (prototypes.empty()) throw InvalidInputError("extract_features: no prototypes");
  const GaborBank bank = make_gabor_bank(enc);
  FeatureMatrix fm;
  fm.records = manifest.records;
  fm.values.reserve(manifest.records.size());
  std::string failures;
  int n_failed = 0;
  for (const ManifestRecord& r : manifest.records) {
    try {
      const SpikeWave c1 =
          image_to_c1(r.path, manifest.resize_height, bank, enc.response_floor);
      fm.values.push_back(c2_potentials(c1, prototypes));
    } catch (const std::exception& e) {
      fm.values.emplace_back(prototypes.size(), 0.0);
      ++n_failed;
      if (n_failed <= 10) failures += std::string("\n  ") + r.path + ": " + e.what();
    }
  }
  if (n_failed > 0) {
    throw DataError("extract_features: " + std::to_string(n_failed) +
                    " image(s) failed:" + failures);
  }
  return fm;
}

/// Same extraction when C1 waves are already in memory.
inline FeatureMatrix extract_features_from_waves(const std::vector<SpikeWave>& waves,
                                                 const std::vector<ManifestRecord>& records,
                                                 const std::vector<Prototype>& prototypes) {
  FeatureMatrix fm;
  fm.records = records;
  fm.values.reserve(waves.size());
  for (const SpikeWave& w : waves) fm.values.push_back(c2_potentials(w, prototypes));
  return fm;
}

/// Untrained control features: per prototype, an active-weight count drawn
/// from round(N(253, 21)) clamped to [1, 1024], that many distinct positions
/// chosen uniformly, each given a value uniform in (0,1]; all other weights 0.
inline std::vector<Prototype> random_prototypes(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("random_prototypes: need at least one prototype");
  Rng rng(seed);
  std::vector<Prototype> protos(static_cast<std::size_t>(n));
  std::vector<int> positions(kS2WeightCount);
  for (Prototype& p : protos) {
    const long drawn = std::lround(253.0 + 21.0 * gaussian(rng));
    const int active = static_cast<int>(std::clamp(drawn, 1L, 1024L));
    std::iota(positions.begin(), positions.end(), 0);
    shuffle_vec(positions, rng);
    std::fill(p.weights.begin(), p.weights.end(), 0.0);
    for (int i = 0; i < active; ++i) {
      p.weights[static_cast<std::size_t>(positions[i])] = 1.0 - uniform_double(rng);
    }
    p.threshold = kS2Threshold;
    p.post_spike_count = 0;
  }
  return protos;
}

/// Image-space footprint of one prototype at scale 1.0: 16 C1 cells at
/// stride 6 plus the 5-px kernel extent on each axis.
constexpr int kReconstructCanvas = (kS2Window - 1) * kC1Stride + kC1Pool + kKernelSize - 1;

/// Weighted sum of oriented kernels, one per (cell, orientation), each placed
/// at its C1 cell's image-space center. Linear in the weight tensor.
inline GrayImage reconstruct_raw(const Prototype& proto, const GaborBank& bank) {
  GrayImage canvas = make_gray(kReconstructCanvas, kReconstructCanvas, 0.0);
  const int half = kKernelSize / 2;
  for (int r = 0; r < kS2Window; ++r) {
    for (int c = 0; c < kS2Window; ++c) {
      // C1 cell (r,c) pools S1 rows 6r..6r+6; with the kernel's own 2-px
      // margin its center lands at image row 6r+5.
      const int cy = r * kC1Stride + (kC1Pool / 2) + half;
      const int cx = c * kC1Stride + (kC1Pool / 2) + half;
      for (int o = 0; o < kNumOrientations; ++o) {
        const double w = proto.w(r, c, o);
        if (w == 0.0) continue;
        for (int dr = -half; dr <= half; ++dr) {
          for (int dc = -half; dc <= half; ++dc) {
            canvas.at(cy + dr, cx + dc) += w * bank.kernels[o].at(dr, dc);
          }
        }
      }
    }
  }
  return canvas;
}

/// Min-max normalized reconstruction; a constant canvas maps to all zeros.
inline GrayImage reconstruct_preferred(const Prototype& proto, const GaborBank& bank) {
  GrayImage canvas = reconstruct_raw(proto, bank);
  const auto [lo_it, hi_it] = std::minmax_element(canvas.pixels.begin(), canvas.pixels.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi > lo) {
    for (double& v : canvas.pixels) v = (v - lo) / (hi - lo);
  } else {
    std::fill(canvas.pixels.begin(), canvas.pixels.end(), 0.0);
  }
  return canvas;
}

}  // namespace spikevis
