#pragma once

#include <string>

#include "spikevis/gabor.hpp"
#include "spikevis/image.hpp"
#include "spikevis/spike.hpp"

namespace spikevis {

/// Front-end knobs. Only the Gabor envelope, carrier phase and the firing
/// floor are tunable; kernel size, wavelength, orientations and the scale
/// ladder are fixed.
struct EncoderConfig {
  double gabor_sigma = 2.0;
  double gabor_gamma = 0.5;
  double gabor_phase = 0.0;
  double response_floor = 0.0;  // a cell fires iff |response| > floor

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

inline GaborBank make_gabor_bank(const EncoderConfig& cfg) {
  return make_gabor_bank(cfg.gabor_sigma, cfg.gabor_gamma, cfg.gabor_phase);
}

/// Intensity-to-latency coding with per-location orientation winner-take-all:
/// at each (scale, row, col) only the strongest orientation fires, with
/// latency 1/|response|. Output is canonically sorted.
inline SpikeWave encode_wave(const Pyramid& pyramid, const GaborBank& bank,
                             double response_floor = 0.0) {
  SpikeWave wave;
  for (int s = 0; s < kNumScales; ++s) {
    const auto maps = s1_responses(pyramid.levels[s], bank);
    const int rows = maps[0].height;
    const int cols = maps[0].width;
    wave.map_size[s] = {rows, cols};
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        int best = 0;
        double best_resp = maps[0].at(r, c);
        for (int o = 1; o < kNumOrientations; ++o) {
          const double resp = maps[o].at(r, c);
          if (resp > best_resp) {
            best_resp = resp;
            best = o;
          }
        }
        if (best_resp > response_floor) {
          wave.events.push_back({1.0 / best_resp, s, best, r, c});
        }
      }
    }
  }
  wave.sort_canonical();
  return wave;
}

/// Full front end: pyramid, Gabor bank, spike wave.
inline SpikeWave encode_image(const GrayImage& img, const EncoderConfig& cfg = {}) {
  const Pyramid pyr = build_pyramid(img);
  const GaborBank bank = make_gabor_bank(cfg);
  return encode_wave(pyr, bank, cfg.response_floor);
}

}  // namespace spikevis
