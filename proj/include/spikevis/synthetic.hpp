#pragma once

// Seeded synthetic corpus generator: parametric shapes (cross, ex, tee,
// ring) drawn with strokes aligned to the encoder's preferred orientations,
// composited on cluttered noise backgrounds at random positions and sizes.
// Also computes clean-pattern C1 footprints for convergence checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "spikevis/encoder.hpp"
#include "spikevis/error.hpp"
#include "spikevis/gabor.hpp"
#include "spikevis/image.hpp"
#include "spikevis/image_io.hpp"
#include "spikevis/manifest.hpp"
#include "spikevis/network.hpp"
#include "spikevis/rng.hpp"

namespace spikevis {

enum class ShapeKind { Cross, Ex, Tee, Ring, Rails };

inline const char* shape_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Cross: return "cross";
    case ShapeKind::Ex: return "ex";
    case ShapeKind::Tee: return "tee";
    case ShapeKind::Ring: return "ring";
    case ShapeKind::Rails: return "rails";
  }
  return "unknown";
}

struct SyntheticParams {
  int canvas = 136;
  double arm = 42.0;              // stroke half-length / ring radius, px
  double stroke_halfwidth = 1.6;  // strokes are ~2*halfwidth+1 px wide
  double fg = 1.0;
  double bg = 0.10;
  double pixel_noise = 0.02;      // gaussian sigma added per pixel
  int clutter = 8;                // short random strokes per image
  double clutter_len = 9.0;
  double clutter_fg = 0.45;
  double rotation_jitter = 0.0;   // radians, uniform in [-j, j] per image
};

namespace detail {

/// Soft-edged segment, composited with max so crossings don't over-brighten.
inline void draw_segment(GrayImage& img, double r0, double c0, double r1, double c1,
                         double halfwidth, double intensity) {
  const double dr = r1 - r0, dc = c1 - c0;
  const double len2 = dr * dr + dc * dc;
  const int rlo = std::max(0, static_cast<int>(std::floor(std::min(r0, r1) - halfwidth - 1)));
  const int rhi = std::min(img.height - 1,
                           static_cast<int>(std::ceil(std::max(r0, r1) + halfwidth + 1)));
  const int clo = std::max(0, static_cast<int>(std::floor(std::min(c0, c1) - halfwidth - 1)));
  const int chi = std::min(img.width - 1,
                           static_cast<int>(std::ceil(std::max(c0, c1) + halfwidth + 1)));
  for (int r = rlo; r <= rhi; ++r) {
    for (int c = clo; c <= chi; ++c) {
      double t = len2 > 0.0 ? ((r - r0) * dr + (c - c0) * dc) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double pr = r0 + t * dr, pc = c0 + t * dc;
      const double dist = std::hypot(r - pr, c - pc);
      const double cover = std::clamp(halfwidth + 0.5 - dist, 0.0, 1.0);
      if (cover > 0.0) {
        double& px = img.at(r, c);
        px = std::max(px, intensity * cover);
      }
    }
  }
}

inline void draw_ring(GrayImage& img, double cr, double cc, double radius, double halfwidth,
                      double intensity) {
  const int rlo = std::max(0, static_cast<int>(std::floor(cr - radius - halfwidth - 1)));
  const int rhi =
      std::min(img.height - 1, static_cast<int>(std::ceil(cr + radius + halfwidth + 1)));
  const int clo = std::max(0, static_cast<int>(std::floor(cc - radius - halfwidth - 1)));
  const int chi =
      std::min(img.width - 1, static_cast<int>(std::ceil(cc + radius + halfwidth + 1)));
  for (int r = rlo; r <= rhi; ++r) {
    for (int c = clo; c <= chi; ++c) {
      const double dist = std::abs(std::hypot(r - cr, c - cc) - radius);
      const double cover = std::clamp(halfwidth + 0.5 - dist, 0.0, 1.0);
      if (cover > 0.0) {
        double& px = img.at(r, c);
        px = std::max(px, intensity * cover);
      }
    }
  }
}

/// Unit direction of a bar at orientation theta (the encoder's convention:
/// a bar along (sin t, cos t) in row/col space excites the kernel for t).
inline void bar_direction(double theta, double& dr, double& dc) {
  dr = std::sin(theta);
  dc = std::cos(theta);
}

}  // namespace detail

/// Draws one clean shape (no background, no noise) centered at (cr, cc).
/// Cross and ex use perpendicular stroke pairs from disjoint orientation
/// channels; tee reuses the cross channels in a different arrangement;
/// rails is a triple of parallel strokes on a single channel, so no other
/// shape can supply more than a third of its structure.
inline void draw_shape(GrayImage& img, ShapeKind kind, double cr, double cc, double arm,
                       double halfwidth, double intensity, double rotation = 0.0) {
  auto stroke_along = [&](double theta, double from, double to, double offset = 0.0) {
    double dr, dc;
    detail::bar_direction(theta + rotation, dr, dc);
    // Lateral offset moves the stroke perpendicular to its direction.
    const double or_ = -dc * offset, oc = dr * offset;
    detail::draw_segment(img, cr + or_ + from * dr, cc + oc + from * dc, cr + or_ + to * dr,
                         cc + oc + to * dc, halfwidth, intensity);
  };
  switch (kind) {
    case ShapeKind::Cross:
      stroke_along(kOrientations[0], -arm, arm);
      stroke_along(kOrientations[2], -arm, arm);
      break;
    case ShapeKind::Ex:
      stroke_along(kOrientations[1], -arm, arm);
      stroke_along(kOrientations[3], -arm, arm);
      break;
    case ShapeKind::Tee:
      stroke_along(kOrientations[0], -arm, arm);
      stroke_along(kOrientations[2], 0.0, 1.6 * arm);
      break;
    case ShapeKind::Ring:
      detail::draw_ring(img, cr, cc, arm, halfwidth, intensity);
      break;
    case ShapeKind::Rails:
      stroke_along(kOrientations[1], -0.8 * arm, 0.8 * arm, -0.55 * arm);
      stroke_along(kOrientations[1], -0.8 * arm, 0.8 * arm, 0.0);
      stroke_along(kOrientations[1], -0.8 * arm, 0.8 * arm, 0.55 * arm);
      break;
  }
}

/// One corpus image: noisy background, clutter strokes, then the shape at
/// the given center. size_scale multiplies the arm length (pyramid-
/// compatible sizes use ratios matching the scale factors).
inline GrayImage render_synthetic(const SyntheticParams& p, ShapeKind kind, double cr,
                                  double cc, double size_scale, Rng& rng) {
  GrayImage img = make_gray(p.canvas, p.canvas, p.bg);
  for (int i = 0; i < p.clutter; ++i) {
    const double r0 = uniform_double(rng) * (p.canvas - 1);
    const double c0 = uniform_double(rng) * (p.canvas - 1);
    const double angle = uniform_double(rng) * 2.0 * kPi;
    const double len = p.clutter_len * (0.6 + 0.8 * uniform_double(rng));
    detail::draw_segment(img, r0, c0, r0 + len * std::sin(angle), c0 + len * std::cos(angle),
                         1.0, p.clutter_fg);
  }
  const double rot =
      p.rotation_jitter > 0.0 ? (2.0 * uniform_double(rng) - 1.0) * p.rotation_jitter : 0.0;
  draw_shape(img, kind, cr, cc, p.arm * size_scale, p.stroke_halfwidth, p.fg, rot);
  if (p.pixel_noise > 0.0) {
    for (double& px : img.pixels) {
      px = std::clamp(px + p.pixel_noise * gaussian(rng), 0.0, 1.0);
    }
  }
  return img;
}

/// Farthest reach of a shape from its center, in units of the arm length.
inline double shape_extent(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Tee: return 1.6;
    case ShapeKind::Rails: return 1.0;
    default: return 1.0;
  }
}

/// Uniform shape center keeping the whole figure inside the canvas.
inline void random_center(const SyntheticParams& p, ShapeKind kind, double size_scale,
                          Rng& rng, double& cr, double& cc) {
  const double margin =
      p.arm * size_scale * shape_extent(kind) + p.stroke_halfwidth + 3.0;
  const double lo = margin;
  const double hi = p.canvas - 1 - margin;
  if (hi <= lo) throw InvalidInputError("render_synthetic: shape does not fit the canvas");
  cr = lo + uniform_double(rng) * (hi - lo);
  cc = lo + uniform_double(rng) * (hi - lo);
}

struct CorpusSpec {
  std::string dir;
  std::vector<ShapeKind> classes;
  int train_per_class = 100;
  int test_per_class = 0;
  std::uint64_t seed = 0;
  SyntheticParams params;
  std::vector<double> size_scales = {1.0};  // sampled uniformly per image
};

/// Writes PNG images plus manifest.csv; returns the manifest. Every image is
/// generated from a seed derived from (corpus seed, class, index), so the
/// corpus is a pure function of its spec.
inline DatasetManifest generate_corpus(const CorpusSpec& spec) {
  if (spec.classes.empty() || spec.train_per_class + spec.test_per_class <= 0) {
    throw InvalidInputError("generate_corpus: empty corpus spec");
  }
  std::filesystem::create_directories(spec.dir);
  DatasetManifest m;
  const int per_class = spec.train_per_class + spec.test_per_class;
  for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
    const ShapeKind kind = spec.classes[ci];
    for (int i = 0; i < per_class; ++i) {
      Rng rng(derive_seed(spec.seed, ci * 1000003ULL + static_cast<std::uint64_t>(i)));
      const double size_scale =
          spec.size_scales[uniform_below(rng, spec.size_scales.size())];
      double cr = 0.0, cc = 0.0;
      random_center(spec.params, kind, size_scale, rng, cr, cc);
      const GrayImage img = render_synthetic(spec.params, kind, cr, cc, size_scale, rng);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d.png", shape_name(kind), i);
      const std::string path = spec.dir + "/" + name;
      write_png(path, img);
      ManifestRecord rec;
      rec.path = path;
      rec.label = shape_name(kind);
      rec.instance = std::to_string(i);
      rec.scale_tag = "s" + std::to_string(std::lround(size_scale * 100.0));
      rec.split = i < spec.train_per_class ? "train" : "test";
      m.records.push_back(std::move(rec));
    }
  }
  save_manifest_csv(spec.dir + "/manifest.csv", m);
  return m;
}

/// Half-peak scale-0 C1 activity of the clean pattern, reduced to weight
/// indices of the best-covering 16x16 window. Cells responding below
/// relative_floor times the pattern's peak pooled response are orientation
/// bleed and excluded; what remains is the generator-side ground truth a
/// converged prototype's high-weight support is compared against.
inline std::vector<std::uint16_t> pattern_footprint(ShapeKind kind, const SyntheticParams& p,
                                                    double size_scale = 1.0,
                                                    const EncoderConfig& enc = {},
                                                    double relative_floor = 0.5) {
  GrayImage img = make_gray(p.canvas, p.canvas, 0.0);
  const double center = (p.canvas - 1) / 2.0;
  draw_shape(img, kind, center, center, p.arm * size_scale, p.stroke_halfwidth, p.fg);
  const SpikeWave c1 = c1_pool(encode_wave(build_pyramid(img), make_gabor_bank(enc),
                                           enc.response_floor));
  double peak = 0.0;
  for (const SpikeEvent& e : c1.events) {
    if (e.scale == 0) peak = std::max(peak, 1.0 / e.latency);
  }
  std::vector<std::array<int, 3>> triples;  // (row, col, orientation) at scale 0
  for (const SpikeEvent& e : c1.events) {
    if (e.scale == 0 && 1.0 / e.latency >= relative_floor * peak) {
      triples.push_back({e.row, e.col, e.map});
    }
  }
  if (triples.empty()) return {};

  int rmin = triples[0][0], rmax = rmin, cmin = triples[0][1], cmax = cmin;
  for (const auto& t : triples) {
    rmin = std::min(rmin, t[0]);
    rmax = std::max(rmax, t[0]);
    cmin = std::min(cmin, t[1]);
    cmax = std::max(cmax, t[1]);
  }
  const int rows = c1.map_size[0].rows, cols = c1.map_size[0].cols;
  int best_ar = 0, best_ac = 0, best_count = -1;
  for (int ar = std::max(0, rmax - 15); ar <= std::min(rmin, rows - kS2Window); ++ar) {
    for (int ac = std::max(0, cmax - 15); ac <= std::min(cmin, cols - kS2Window); ++ac) {
      int count = 0;
      for (const auto& t : triples) {
        if (t[0] >= ar && t[0] < ar + kS2Window && t[1] >= ac && t[1] < ac + kS2Window) {
          ++count;
        }
      }
      if (count > best_count) {
        best_count = count;
        best_ar = ar;
        best_ac = ac;
      }
    }
  }
  std::vector<std::uint16_t> footprint;
  for (const auto& t : triples) {
    const int r = t[0] - best_ar, c = t[1] - best_ac;
    if (r >= 0 && r < kS2Window && c >= 0 && c < kS2Window) {
      footprint.push_back(static_cast<std::uint16_t>(Prototype::windex(r, c, t[2])));
    }
  }
  std::sort(footprint.begin(), footprint.end());
  footprint.erase(std::unique(footprint.begin(), footprint.end()), footprint.end());
  return footprint;
}

/// Weight indices with weight >= threshold.
inline std::vector<std::uint16_t> high_weight_support(const Prototype& proto,
                                                      double threshold = 0.9) {
  std::vector<std::uint16_t> out;
  for (int i = 0; i < kS2WeightCount; ++i) {
    if (proto.weights[static_cast<std::size_t>(i)] >= threshold) {
      out.push_back(static_cast<std::uint16_t>(i));
    }
  }
  return out;
}

/// Jaccard similarity between two weight-index sets, maximized over all 2D
/// cell shifts of the second set (a prototype may latch onto the pattern at
/// any window offset). Shifted-out elements still count in the union.
inline double footprint_jaccard(const std::vector<std::uint16_t>& support,
                                const std::vector<std::uint16_t>& footprint) {
  if (support.empty() || footprint.empty()) return 0.0;
  const std::set<std::uint16_t> sup(support.begin(), support.end());
  double best = 0.0;
  for (int dr = -(kS2Window - 1); dr < kS2Window; ++dr) {
    for (int dc = -(kS2Window - 1); dc < kS2Window; ++dc) {
      int inter = 0;
      for (std::uint16_t wi : footprint) {
        const int o = wi % kNumOrientations;
        const int cell = wi / kNumOrientations;
        const int r = cell / kS2Window + dr;
        const int c = cell % kS2Window + dc;
        if (r < 0 || r >= kS2Window || c < 0 || c >= kS2Window) continue;
        if (sup.count(static_cast<std::uint16_t>(Prototype::windex(r, c, o)))) ++inter;
      }
      const double uni =
          static_cast<double>(sup.size()) + static_cast<double>(footprint.size()) - inter;
      best = std::max(best, inter / uni);
    }
  }
  return best;
}

}  // namespace spikevis
