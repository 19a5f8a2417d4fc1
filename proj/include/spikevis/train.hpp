#pragma once

// Unsupervised training loop: shuffled presentation epochs, per-image
// competition, STDP on the winners, stop once every prototype has fired
// target_spikes times.

#include <string>
#include <utility>
#include <vector>

#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/image_io.hpp"
#include "spikevis/learning.hpp"
#include "spikevis/manifest.hpp"
#include "spikevis/network.hpp"
#include "spikevis/rng.hpp"

namespace spikevis {

struct TrainOutcome {
  std::vector<Prototype> prototypes;
  int epochs = 0;          // epochs started (the last may be partial)
  long presentations = 0;  // images shown in total
};

/// One image from disk to its C1 spike wave.
inline SpikeWave image_to_c1(const std::string& path, int resize_height,
                             const GaborBank& bank, double response_floor) {
  const GrayImage img = load_image_gray(path, resize_height);
  return c1_pool(encode_wave(build_pyramid(img), bank, response_floor));
}

inline TrainOutcome train(const DatasetManifest& manifest, const TrainConfig& cfg,
                          const EncoderConfig& enc = {}) {
  if (manifest.records.empty()) throw InvalidInputError("train: empty manifest");
  if (cfg.target_spikes < 1) throw InvalidInputError("train: target_spikes must be >= 1");
  if (cfg.k_wta < 1) throw InvalidInputError("train: k_wta must be >= 1");

  const GaborBank bank = make_gabor_bank(enc);
  const std::size_t n_images = manifest.records.size();

  TrainOutcome out;
  // Stream 0 of the seed initializes weights; streams 1.. reshuffle epochs.
  out.prototypes = init_prototypes(cfg.n_prototypes, derive_seed(cfg.rng_seed, 0));

  std::vector<SpikeWave> cache;
  std::vector<char> cached;
  if (cfg.cache_waves) {
    cache.resize(n_images);
    cached.assign(n_images, 0);
  }
  auto c1_of = [&](std::size_t i) -> const SpikeWave& {
    if (cfg.cache_waves) {
      if (!cached[i]) {
        cache[i] = image_to_c1(manifest.records[i].path, manifest.resize_height, bank,
                               enc.response_floor);
        cached[i] = 1;
      }
      return cache[i];
    }
    static thread_local SpikeWave scratch;
    scratch = image_to_c1(manifest.records[i].path, manifest.resize_height, bank,
                          enc.response_floor);
    return scratch;
  };

  auto min_count = [&] {
    long m = out.prototypes.front().post_spike_count;
    for (const Prototype& p : out.prototypes) m = std::min(m, p.post_spike_count);
    return m;
  };

  std::vector<std::size_t> order(n_images);
  for (std::size_t i = 0; i < n_images; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ++out.epochs;
    Rng rng(derive_seed(cfg.rng_seed, 1 + static_cast<std::uint64_t>(epoch)));
    shuffle_vec(order, rng);
    for (std::size_t idx : order) {
      const SpikeWave& c1 = c1_of(idx);
      ++out.presentations;
      const std::vector<S2Firing> accepted =
          resolve_competition(s2_propagate_learning(c1, out.prototypes), cfg);
      for (const S2Firing& f : accepted) {
        Prototype& p = out.prototypes[static_cast<std::size_t>(f.prototype)];
        apply_stdp(p, f.contributing_pre, lr_schedule(p.post_spike_count));
        ++p.post_spike_count;
      }
      if (!accepted.empty() && min_count() >= cfg.target_spikes) return out;
    }
  }

  std::string msg = "train: not converged after " + std::to_string(cfg.max_epochs) +
                    " epochs; per-prototype spike counts:";
  std::vector<long> counts;
  counts.reserve(out.prototypes.size());
  for (const Prototype& p : out.prototypes) {
    counts.push_back(p.post_spike_count);
    msg += " " + std::to_string(p.post_spike_count);
  }
  throw NonConvergenceError(msg, std::move(counts));
}

}  // namespace spikevis
