#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spikevis/error.hpp"
#include "spikevis/network.hpp"
#include "spikevis/rng.hpp"

namespace spikevis {

/// STDP learning rates. a_plus doubles every 400 postsynaptic spikes from
/// 2^-6 up to 2^-2; a_minus keeps the fixed a+/a- ratio of -4/3.
struct StdpParams {
  double a_plus = 0.0;
  double a_minus = 0.0;
};

constexpr double kAPlusInit = 0.015625;    // 2^-6
constexpr double kAPlusMax = 0.25;         // 2^-2
constexpr long kDoublingPeriod = 400;      // postsynaptic spikes per doubling
constexpr double kRatioMinusOverPlus = -0.75;  // from a+/a- = -4/3

/// Learning-rate schedule as a function of the prototype's spike counter.
inline StdpParams lr_schedule(long post_spike_count) {
  const long steps = std::min<long>(post_spike_count / kDoublingPeriod, 4);
  StdpParams p;
  p.a_plus = std::ldexp(1.0, -6 + static_cast<int>(steps));
  p.a_minus = kRatioMinusOverPlus * p.a_plus;
  return p;
}

/// One synapse update: dw = a * w * (1 - w), potentiating afferents that
/// spiked at or before the postsynaptic spike and depressing the rest
/// (afferents that never spiked count as "after"). Result stays in [0,1].
inline double stdp_update(double w, bool pre_fired_before_post, double a_plus, double a_minus) {
  const double a = pre_fired_before_post ? a_plus : a_minus;
  return std::clamp(w + a * w * (1.0 - w), 0.0, 1.0);
}

/// Training knobs. inhibition_radius is a Chebyshev distance in C1 cells.
struct TrainConfig {
  int n_prototypes = 1;
  long target_spikes = 600;
  int k_wta = 2;
  int inhibition_radius = 5;
  std::uint64_t rng_seed = 0;
  int max_epochs = 10000;
  bool cache_waves = true;  // keep each image's C1 wave in memory across epochs
};

/// Weights i.i.d. N(0.8, 0.05) clamped to [0,1], deterministic given seed.
inline std::vector<Prototype> init_prototypes(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("init_prototypes: need at least one prototype");
  Rng rng(seed);
  std::vector<Prototype> protos(static_cast<std::size_t>(n));
  for (Prototype& p : protos) {
    for (double& w : p.weights) {
      w = std::clamp(0.8 + 0.05 * gaussian(rng), 0.0, 1.0);
    }
    p.threshold = kS2Threshold;
    p.post_spike_count = 0;
  }
  return protos;
}

/// Greedy competition over canonically sorted candidate firings. A candidate
/// is accepted iff its prototype has not fired yet this image, no accepted
/// firing sits at the same scale within the inhibition radius, and its scale
/// has fewer than k_wta accepted firings.
inline std::vector<S2Firing> resolve_competition(const std::vector<S2Firing>& candidates,
                                                 const TrainConfig& cfg) {
  std::vector<S2Firing> accepted;
  std::vector<std::uint8_t> proto_fired;
  std::array<int, kNumScales> scale_count{};
  for (const S2Firing& cand : candidates) {
    if (cand.prototype >= static_cast<int>(proto_fired.size())) {
      proto_fired.resize(cand.prototype + 1, 0);
    }
    if (proto_fired[cand.prototype]) continue;
    if (scale_count[cand.scale] >= cfg.k_wta) continue;
    bool inhibited = false;
    for (const S2Firing& acc : accepted) {
      if (acc.scale != cand.scale) continue;
      const int d = std::max(std::abs(acc.row - cand.row), std::abs(acc.col - cand.col));
      if (d <= cfg.inhibition_radius) {
        inhibited = true;
        break;
      }
    }
    if (inhibited) continue;
    accepted.push_back(cand);
    proto_fired[cand.prototype] = 1;
    ++scale_count[cand.scale];
  }
  return accepted;
}

/// Applies the STDP rule to every weight of one prototype after it fired.
/// contributing_pre must be sorted weight indices.
inline void apply_stdp(Prototype& proto, std::span<const std::uint16_t> contributing_pre,
                       const StdpParams& rates) {
  auto it = contributing_pre.begin();
  for (int i = 0; i < kS2WeightCount; ++i) {
    while (it != contributing_pre.end() && *it < i) ++it;
    const bool pre = (it != contributing_pre.end() && *it == i);
    proto.weights[i] = stdp_update(proto.weights[i], pre, rates.a_plus, rates.a_minus);
  }
}

}  // namespace spikevis
