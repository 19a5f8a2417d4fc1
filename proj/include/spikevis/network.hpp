#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "spikevis/spike.hpp"

namespace spikevis {

// C1 pools the first spike in a 7x7 S1 window; adjacent windows overlap by
// one S1 row/column, so the subsampling stride is 6.
constexpr int kC1Pool = 7;
constexpr int kC1Stride = 6;

// S2 receptive field: 16x16 C1 cells over all four orientations.
constexpr int kS2Window = 16;
constexpr int kS2WeightCount = kS2Window * kS2Window * kNumOrientations;
constexpr double kS2Threshold = 64.0;  // = 1/4 * 16 * 16

inline int c1_dim(int s1_dim) {
  return s1_dim < kC1Pool ? 0 : (s1_dim - kC1Pool) / kC1Stride + 1;
}

/// One learned S2 feature: weight tensor over a 16x16x4 C1 neighborhood,
/// firing threshold, and how many postsynaptic spikes it has emitted.
struct Prototype {
  std::vector<double> weights = std::vector<double>(kS2WeightCount, 0.0);
  double threshold = kS2Threshold;
  long post_spike_count = 0;

  static int windex(int r, int c, int o) { return (r * kS2Window + c) * kNumOrientations + o; }
  double w(int r, int c, int o) const { return weights[windex(r, c, o)]; }
  double& w(int r, int c, int o) { return weights[windex(r, c, o)]; }

  double weight_sum() const {
    double s = 0.0;
    for (double x : weights) s += x;
    return s;
  }
};

/// First threshold crossing of one S2 duplicate. (row, col) anchor the 16x16
/// receptive field in C1 coordinates; contributing_pre lists the weight
/// indices of afferents that spiked up to (and including) the crossing event.
struct S2Firing {
  int prototype = 0;
  int scale = 0;
  int row = 0;
  int col = 0;
  double latency = 0.0;
  std::vector<std::uint16_t> contributing_pre;

  friend bool operator==(const S2Firing&, const S2Firing&) = default;
};

inline bool firing_canonical_less(const S2Firing& a, const S2Firing& b) {
  return std::tie(a.latency, a.scale, a.prototype, a.row, a.col) <
         std::tie(b.latency, b.scale, b.prototype, b.row, b.col);
}

/// First-spike max pooling: per (scale, orientation, C1 cell), propagate the
/// earliest S1 spike inside the cell's 7x7 window. Output sorted canonically.
inline SpikeWave c1_pool(const SpikeWave& s1) {
  SpikeWave out;
  std::array<std::vector<std::uint8_t>, kNumScales> emitted;
  std::array<int, kNumScales> c1_rows{}, c1_cols{};
  for (int s = 0; s < kNumScales; ++s) {
    c1_rows[s] = c1_dim(s1.map_size[s].rows);
    c1_cols[s] = c1_dim(s1.map_size[s].cols);
    out.map_size[s] = {c1_rows[s], c1_cols[s]};
    emitted[s].assign(static_cast<std::size_t>(c1_rows[s]) * c1_cols[s] * kNumOrientations, 0);
  }
  // Events arrive in latency order, so the first touch of a cell is its min.
  for (const SpikeEvent& e : s1.events) {
    const int rows = c1_rows[e.scale];
    const int cols = c1_cols[e.scale];
    if (rows == 0 || cols == 0) continue;
    // Cells whose window [R*6, R*6+6] covers e.row (at most two per axis).
    const int r_lo = std::max(0, (e.row - kC1Pool + kC1Stride) / kC1Stride);
    const int r_hi = std::min(rows - 1, e.row / kC1Stride);
    const int c_lo = std::max(0, (e.col - kC1Pool + kC1Stride) / kC1Stride);
    const int c_hi = std::min(cols - 1, e.col / kC1Stride);
    for (int R = r_lo; R <= r_hi; ++R) {
      for (int C = c_lo; C <= c_hi; ++C) {
        std::uint8_t& seen =
            emitted[e.scale][(static_cast<std::size_t>(R) * cols + C) * kNumOrientations + e.map];
        if (!seen) {
          seen = 1;
          out.events.push_back({e.latency, e.scale, e.map, R, C});
        }
      }
    }
  }
  out.sort_canonical();
  return out;
}

namespace detail {

/// Per-scale anchor grid for S2 duplicates. Maps smaller than the 16x16
/// window contribute no placements.
struct AnchorGrid {
  std::array<int, kNumScales> rows{}, cols{};

  explicit AnchorGrid(const SpikeWave& c1) {
    for (int s = 0; s < kNumScales; ++s) {
      rows[s] = std::max(0, c1.map_size[s].rows - kS2Window + 1);
      cols[s] = std::max(0, c1.map_size[s].cols - kS2Window + 1);
    }
  }
  int count(int s) const { return rows[s] * cols[s]; }
};

inline std::vector<std::uint16_t> collect_contributing(const SpikeWave& c1, std::size_t upto,
                                                       int scale, int row, int col) {
  std::vector<std::uint16_t> pre;
  for (std::size_t i = 0; i <= upto; ++i) {
    const SpikeEvent& e = c1.events[i];
    if (e.scale != scale) continue;
    const int dr = e.row - row;
    const int dc = e.col - col;
    if (dr < 0 || dr >= kS2Window || dc < 0 || dc >= kS2Window) continue;
    pre.push_back(static_cast<std::uint16_t>(Prototype::windex(dr, dc, e.map)));
  }
  std::sort(pre.begin(), pre.end());
  return pre;
}

}  // namespace detail

/// Event-driven S2 propagation for the learning phase: every duplicate
/// (prototype, scale, anchor) integrates the C1 wave in latency order and its
/// first threshold crossing is reported. Competition between crossings is
/// resolved separately (resolve_competition), so the returned list covers all
/// duplicates. Sorted canonically.
inline std::vector<S2Firing> s2_propagate_learning(const SpikeWave& c1,
                                                   std::span<const Prototype> prototypes) {
  const detail::AnchorGrid grid(c1);
  const int n_proto = static_cast<int>(prototypes.size());

  // potential[p][s] over anchors, row-major
  std::vector<std::vector<std::vector<double>>> potential(n_proto);
  std::vector<std::vector<std::vector<std::uint8_t>>> fired(n_proto);
  for (int p = 0; p < n_proto; ++p) {
    potential[p].resize(kNumScales);
    fired[p].resize(kNumScales);
    for (int s = 0; s < kNumScales; ++s) {
      potential[p][s].assign(grid.count(s), 0.0);
      fired[p][s].assign(grid.count(s), 0);
    }
  }

  std::vector<S2Firing> firings;
  for (std::size_t i = 0; i < c1.events.size(); ++i) {
    const SpikeEvent& e = c1.events[i];
    const int s = e.scale;
    if (grid.count(s) == 0) continue;
    const int r_lo = std::max(0, e.row - kS2Window + 1);
    const int r_hi = std::min(grid.rows[s] - 1, e.row);
    const int c_lo = std::max(0, e.col - kS2Window + 1);
    const int c_hi = std::min(grid.cols[s] - 1, e.col);
    for (int p = 0; p < n_proto; ++p) {
      const Prototype& proto = prototypes[p];
      for (int R = r_lo; R <= r_hi; ++R) {
        const int base = R * grid.cols[s];
        for (int C = c_lo; C <= c_hi; ++C) {
          const int a = base + C;
          if (fired[p][s][a]) continue;
          potential[p][s][a] += proto.w(e.row - R, e.col - C, e.map);
          if (potential[p][s][a] >= proto.threshold) {
            fired[p][s][a] = 1;
            firings.push_back(
                {p, s, R, C, e.latency, detail::collect_contributing(c1, i, s, R, C)});
          }
        }
      }
    }
  }
  std::sort(firings.begin(), firings.end(), firing_canonical_less);
  return firings;
}

/// Per-prototype, per-scale maximum potential over all anchors with infinite
/// threshold: the whole wave is integrated, so only the set of spiking
/// afferents matters. Order-independent by construction.
inline std::vector<std::array<double, kNumScales>> c2_potentials_per_scale(
    const SpikeWave& c1, std::span<const Prototype> prototypes) {
  const detail::AnchorGrid grid(c1);
  const int n_proto = static_cast<int>(prototypes.size());
  std::vector<std::vector<double>> potential(n_proto);  // concatenated scales

  std::array<int, kNumScales> offset{};
  int total = 0;
  for (int s = 0; s < kNumScales; ++s) {
    offset[s] = total;
    total += grid.count(s);
  }
  for (int p = 0; p < n_proto; ++p) potential[p].assign(total, 0.0);

  // An afferent either spiked or it did not; collapse duplicate addresses.
  std::array<std::vector<std::uint8_t>, kNumScales> seen;
  for (int s = 0; s < kNumScales; ++s) {
    seen[s].assign(
        static_cast<std::size_t>(c1.map_size[s].rows) * c1.map_size[s].cols * kNumOrientations, 0);
  }
  for (const SpikeEvent& e : c1.events) {
    const int s = e.scale;
    if (grid.count(s) == 0) continue;
    std::uint8_t& mark =
        seen[s][(static_cast<std::size_t>(e.row) * c1.map_size[s].cols + e.col) * kNumOrientations +
                e.map];
    if (mark) continue;
    mark = 1;
    const int r_lo = std::max(0, e.row - kS2Window + 1);
    const int r_hi = std::min(grid.rows[s] - 1, e.row);
    const int c_lo = std::max(0, e.col - kS2Window + 1);
    const int c_hi = std::min(grid.cols[s] - 1, e.col);
    for (int p = 0; p < n_proto; ++p) {
      const Prototype& proto = prototypes[p];
      double* pot = potential[p].data() + offset[s];
      for (int R = r_lo; R <= r_hi; ++R) {
        const int base = R * grid.cols[s];
        for (int C = c_lo; C <= c_hi; ++C) {
          pot[base + C] += proto.w(e.row - R, e.col - C, e.map);
        }
      }
    }
  }

  std::vector<std::array<double, kNumScales>> out(n_proto);
  for (int p = 0; p < n_proto; ++p) {
    for (int s = 0; s < kNumScales; ++s) {
      double best = 0.0;
      const double* pot = potential[p].data() + offset[s];
      for (int a = 0; a < grid.count(s); ++a) best = std::max(best, pot[a]);
      out[p][s] = best;
    }
  }
  return out;
}

/// C2 readout: per prototype, the maximum potential over all positions and
/// scales after propagating the whole wave.
inline std::vector<double> c2_potentials(const SpikeWave& c1,
                                         std::span<const Prototype> prototypes) {
  const auto per_scale = c2_potentials_per_scale(c1, prototypes);
  std::vector<double> out(per_scale.size(), 0.0);
  for (std::size_t p = 0; p < per_scale.size(); ++p) {
    for (double v : per_scale[p]) out[p] = std::max(out[p], v);
  }
  return out;
}

}  // namespace spikevis
