#pragma once

#include <algorithm>
#include <array>
#include <tuple>
#include <vector>

#include "spikevis/image.hpp"

namespace spikevis {

/// One spike: abstract latency plus full address. `map` is the orientation
/// index in S1/C1 waves and the prototype index in S2 output.
struct SpikeEvent {
  double latency = 0.0;
  int scale = 0;
  int map = 0;
  int row = 0;
  int col = 0;

  friend bool operator==(const SpikeEvent& a, const SpikeEvent& b) = default;
};

/// Canonical event order: latency first, ties broken by (scale, map, row, col).
inline bool canonical_less(const SpikeEvent& a, const SpikeEvent& b) {
  return std::tie(a.latency, a.scale, a.map, a.row, a.col) <
         std::tie(b.latency, b.scale, b.map, b.row, b.col);
}

struct MapSize {
  int rows = 0;
  int cols = 0;
  friend bool operator==(const MapSize&, const MapSize&) = default;
};

/// Latency-ordered event sequence from one image presentation, with the
/// per-scale map geometry the addresses refer to.
struct SpikeWave {
  std::vector<SpikeEvent> events;
  std::array<MapSize, kNumScales> map_size{};

  void sort_canonical() { std::sort(events.begin(), events.end(), canonical_less); }
};

}  // namespace spikevis
