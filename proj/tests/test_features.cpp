#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "spikevis/features.hpp"
#include "spikevis/synthetic.hpp"

using namespace spikevis;

TEST_CASE("feature rows are the c2 readout and extraction mutates nothing", "[features]") {
  Rng rng(301);
  std::vector<SpikeWave> waves;
  std::vector<ManifestRecord> records;
  for (int i = 0; i < 6; ++i) {
    waves.push_back(oracle::random_wave(rng));
    ManifestRecord r;
    r.path = "mem" + std::to_string(i);
    r.label = i % 2 ? "odd" : "even";
    r.instance = std::to_string(i);
    records.push_back(r);
  }
  std::vector<Prototype> protos;
  for (int i = 0; i < 4; ++i) protos.push_back(oracle::random_prototype(rng, 1e9));
  const std::vector<Prototype> before = protos;

  const FeatureMatrix fm = extract_features_from_waves(waves, records, protos);
  REQUIRE(fm.rows() == 6);
  REQUIRE(fm.cols() == 4);
  for (int i = 0; i < fm.rows(); ++i) {
    const auto want = c2_potentials(waves[static_cast<std::size_t>(i)], protos);
    REQUIRE(fm.values[static_cast<std::size_t>(i)] == want);
    REQUIRE(fm.label(i) == records[static_cast<std::size_t>(i)].label);
    for (double v : fm.values[static_cast<std::size_t>(i)]) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0);
    }
  }
  for (std::size_t p = 0; p < protos.size(); ++p) {
    REQUIRE(protos[p].weights == before[p].weights);
  }
}

TEST_CASE("extraction reports unreadable images collectively", "[features]") {
  DatasetManifest m;
  m.records.push_back({"missing_one.png", "a", "1", "", "", "", ""});
  m.records.push_back({"missing_two.png", "a", "2", "", "", "", ""});
  std::vector<Prototype> protos(1);
  try {
    extract_features(m, protos);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("2 image(s) failed") != std::string::npos);
    REQUIRE(msg.find("missing_one.png") != std::string::npos);
    REQUIRE(msg.find("missing_two.png") != std::string::npos);
  }
  REQUIRE_THROWS_AS(extract_features(m, {}), InvalidInputError);
}

TEST_CASE("random prototypes draw seeded sparse uniform weights", "[features]") {
  const auto a = random_prototypes(50, 9);
  const auto b = random_prototypes(50, 9);
  const auto c = random_prototypes(50, 10);
  REQUIRE(a.size() == 50);
  bool any_differs = false;
  long total_active = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    REQUIRE(a[p].weights == b[p].weights);
    if (a[p].weights != c[p].weights) any_differs = true;
    REQUIRE(a[p].threshold == kS2Threshold);
    int active = 0;
    for (double w : a[p].weights) {
      REQUIRE(w >= 0.0);
      REQUIRE(w <= 1.0);
      if (w > 0.0) ++active;
    }
    REQUIRE(active >= 1);
    REQUIRE(active <= 1024);
    total_active += active;
  }
  REQUIRE(any_differs);
  // Active counts are draws from round(N(253, 21)); the sample mean over 50
  // prototypes should sit within 3 sigma / sqrt(n) of the center.
  const double mean = static_cast<double>(total_active) / 50.0;
  REQUIRE(std::fabs(mean - 253.0) <= 3.0 * 21.0 / std::sqrt(50.0));
  REQUIRE_THROWS_AS(random_prototypes(0, 1), InvalidInputError);
}

TEST_CASE("reconstruction is linear before normalization", "[features]") {
  Rng rng(302);
  const GaborBank bank = make_gabor_bank();
  Prototype p1, p2, sum;
  for (int i = 0; i < kS2WeightCount; ++i) {
    p1.weights[static_cast<std::size_t>(i)] = uniform_double(rng);
    p2.weights[static_cast<std::size_t>(i)] = uniform_double(rng);
    sum.weights[static_cast<std::size_t>(i)] =
        p1.weights[static_cast<std::size_t>(i)] + p2.weights[static_cast<std::size_t>(i)];
  }
  const GrayImage r1 = reconstruct_raw(p1, bank);
  const GrayImage r2 = reconstruct_raw(p2, bank);
  const GrayImage rs = reconstruct_raw(sum, bank);
  REQUIRE(rs.width == kReconstructCanvas);
  REQUIRE(rs.height == kReconstructCanvas);
  for (std::size_t i = 0; i < rs.pixels.size(); ++i) {
    REQUIRE(rs.pixels[i] == Catch::Approx(r1.pixels[i] + r2.pixels[i]).margin(1e-12));
  }
}

TEST_CASE("preferred-stimulus images are normalized to [0,1]", "[features]") {
  Rng rng(303);
  const GaborBank bank = make_gabor_bank();
  Prototype proto;
  for (double& w : proto.weights) w = uniform_double(rng);
  const GrayImage img = reconstruct_preferred(proto, bank);
  double lo = 1.0, hi = 0.0;
  for (double v : img.pixels) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  REQUIRE(lo == 0.0);
  REQUIRE(hi == 1.0);

  // An all-zero tensor reconstructs to a flat zero canvas.
  const GrayImage flat = reconstruct_preferred(Prototype{}, bank);
  for (double v : flat.pixels) REQUIRE(v == 0.0);
}
