#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "oracles.hpp"
#include "spikevis/encoder.hpp"
#include "spikevis/synthetic.hpp"

using namespace spikevis;

namespace {

GrayImage random_image(int n, Rng& rng, double lo = 0.0, double hi = 0.5) {
  GrayImage img = make_gray(n, n);
  for (double& p : img.pixels) p = lo + uniform_double(rng) * (hi - lo);
  return img;
}

}  // namespace

TEST_CASE("waves are sorted with one orientation per location", "[encoder]") {
  Rng rng(31);
  const SpikeWave wave = encode_image(random_image(48, rng));
  REQUIRE(!wave.events.empty());
  REQUIRE(std::is_sorted(wave.events.begin(), wave.events.end(), canonical_less));
  std::set<std::tuple<int, int, int>> locations;
  for (const SpikeEvent& e : wave.events) {
    REQUIRE(e.scale >= 0);
    REQUIRE(e.scale < kNumScales);
    REQUIRE(e.map >= 0);
    REQUIRE(e.map < kNumOrientations);
    REQUIRE(e.row >= 0);
    REQUIRE(e.row < wave.map_size[e.scale].rows);
    REQUIRE(e.col >= 0);
    REQUIRE(e.col < wave.map_size[e.scale].cols);
    REQUIRE(std::isfinite(e.latency));
    REQUIRE(e.latency > 0.0);
    // Winner-take-all across orientations: the location appears once.
    REQUIRE(locations.insert({e.scale, e.row, e.col}).second);
  }
}

TEST_CASE("latency is the reciprocal of the winning response", "[encoder]") {
  Rng rng(32);
  const GrayImage img = random_image(32, rng);
  const Pyramid pyr = build_pyramid(img);
  const GaborBank bank = make_gabor_bank();
  const SpikeWave wave = encode_wave(pyr, bank);
  const auto maps = s1_responses(pyr.levels[2], bank);
  int checked = 0;
  for (const SpikeEvent& e : wave.events) {
    if (e.scale != 2) continue;
    double best = 0.0;
    for (int o = 0; o < kNumOrientations; ++o) best = std::max(best, maps[o].at(e.row, e.col));
    REQUIRE(e.latency == 1.0 / maps[e.map].at(e.row, e.col));
    REQUIRE(maps[e.map].at(e.row, e.col) == best);
    ++checked;
  }
  REQUIRE(checked > 0);
}

TEST_CASE("raising the floor keeps a subset of strictly stronger spikes", "[encoder]") {
  Rng rng(33);
  const GrayImage img = random_image(40, rng);
  const SpikeWave all = encode_image(img);
  EncoderConfig enc;
  enc.response_floor = 0.3;
  const SpikeWave strong = encode_image(img, enc);
  REQUIRE(strong.events.size() < all.events.size());
  REQUIRE(!strong.events.empty());
  std::set<std::tuple<int, int, int, int>> in_all;
  for (const SpikeEvent& e : all.events) in_all.insert({e.scale, e.map, e.row, e.col});
  for (const SpikeEvent& e : strong.events) {
    REQUIRE(1.0 / e.latency > 0.3);
    REQUIRE(in_all.count({e.scale, e.map, e.row, e.col}) == 1);
  }
}

TEST_CASE("scaling brightness by a power of two preserves the wave exactly", "[encoder]") {
  Rng rng(34);
  // Dyadic pixels in [0, 0.5) leave headroom so gain 2 involves no clamping.
  GrayImage img = make_gray(48, 48);
  for (double& p : img.pixels) p = static_cast<double>(uniform_below(rng, 128)) / 256.0;
  const SpikeWave base = encode_image(img);
  for (const double gain : {0.5, 2.0}) {
    GrayImage scaled = img;
    for (double& p : scaled.pixels) p *= gain;
    const SpikeWave out = encode_image(scaled);
    REQUIRE(out.events.size() == base.events.size());
    for (std::size_t i = 0; i < base.events.size(); ++i) {
      const SpikeEvent& a = base.events[i];
      const SpikeEvent& b = out.events[i];
      REQUIRE(std::tie(a.scale, a.map, a.row, a.col) == std::tie(b.scale, b.map, b.row, b.col));
      REQUIRE(b.latency == a.latency / gain);  // exact: gain is a power of two
    }
  }
}

TEST_CASE("adding a constant to the image leaves the wave unchanged", "[encoder]") {
  Rng rng(35);
  GrayImage img = make_gray(48, 48);
  for (double& p : img.pixels) p = static_cast<double>(uniform_below(rng, 128)) / 256.0;
  GrayImage off = img;
  for (double& p : off.pixels) p += 0.25;
  // The kernels are zero-mean, so the offset cancels analytically; resampling
  // rounds in the last bits, hence the tolerance on latencies.
  EncoderConfig enc;
  enc.response_floor = 0.01;
  const SpikeWave a = encode_image(img, enc);
  const SpikeWave b = encode_image(off, enc);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const SpikeEvent& x = a.events[i];
    const SpikeEvent& y = b.events[i];
    REQUIRE(std::tie(x.scale, x.map, x.row, x.col) == std::tie(y.scale, y.map, y.row, y.col));
    REQUIRE(std::fabs(x.latency - y.latency) <= 1e-12 * x.latency);
  }
}

TEST_CASE("encoding is deterministic", "[encoder]") {
  Rng rng(36);
  const GrayImage img = random_image(36, rng);
  const SpikeWave a = encode_image(img);
  const SpikeWave b = encode_image(img);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) REQUIRE(a.events[i] == b.events[i]);
  REQUIRE(a.map_size == b.map_size);
}
