#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "spikevis/classify.hpp"
#include "spikevis/rng.hpp"

using namespace spikevis;

namespace {

/// Three well-separated classes in 6 features: class k lights features
/// {2k, 2k+1} strongly, everything else stays near zero.
FeatureMatrix blob_fixture(int per_class, std::uint64_t seed) {
  FeatureMatrix fm;
  Rng rng(seed);
  const std::vector<std::string> classes = {"ant", "bee", "cow"};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> row(6, 0.0);
      for (int f = 0; f < 6; ++f) row[static_cast<std::size_t>(f)] = 2.0 * uniform_double(rng);
      row[static_cast<std::size_t>(2 * k)] = 40.0 + 5.0 * uniform_double(rng);
      row[static_cast<std::size_t>(2 * k + 1)] = 35.0 + 5.0 * uniform_double(rng);
      fm.values.push_back(std::move(row));
      ManifestRecord r;
      r.path = classes[static_cast<std::size_t>(k)] + std::to_string(i);
      r.label = classes[static_cast<std::size_t>(k)];
      r.instance = std::to_string(i);
      fm.records.push_back(std::move(r));
    }
  }
  return fm;
}

}  // namespace

TEST_CASE("the voting classifier separates disjoint activity patterns", "[classify]") {
  const FeatureMatrix fm = blob_fixture(20, 41);
  const SimpleClassifierModel model = train_simple(fm);
  REQUIRE(model.classes == std::vector<std::string>{"ant", "bee", "cow"});
  REQUIRE(model.pairs.size() == 3);  // C(3,2)
  for (const SimplePairModel& pm : model.pairs) {
    REQUIRE(pm.class_a < pm.class_b);
    REQUIRE(!pm.degenerate);
    REQUIRE(pm.features_a.size() == pm.prob_a.size());
    REQUIRE(pm.features_b.size() == pm.prob_b.size());
    for (double p : pm.prob_a) {
      REQUIRE(p > 0.0);
      REQUIRE(p < 1.0);  // add-one smoothing keeps probabilities interior
    }
  }
  REQUIRE(accuracy_simple(model, fm) == 1.0);

  // Binarization thresholds are half the per-feature training maximum.
  for (int f = 0; f < fm.cols(); ++f) {
    double mx = 0.0;
    for (const auto& row : fm.values) mx = std::max(mx, row[static_cast<std::size_t>(f)]);
    REQUIRE(model.binarize_threshold[static_cast<std::size_t>(f)] == 0.5 * mx);
  }
}

TEST_CASE("voting predictions ignore positive rescaling of the input row", "[classify]") {
  const FeatureMatrix fm = blob_fixture(12, 42);
  const SimpleClassifierModel model = train_simple(fm);
  Rng rng(43);
  for (int i = 0; i < fm.rows(); ++i) {
    const auto& row = fm.values[static_cast<std::size_t>(i)];
    const std::string base = predict_simple(model, row);
    for (const double c : {0.01, 0.5, 3.0, 250.0}) {
      std::vector<double> scaled = row;
      for (double& v : scaled) v *= c;
      REQUIRE(predict_simple(model, scaled) == base);
    }
    std::vector<double> jittered = row;
    for (double& v : jittered) v *= 1.0 + 0.3 * uniform_double(rng);
    (void)predict_simple(model, jittered);  // any label, but must not throw
  }
}

TEST_CASE("identically distributed classes produce degenerate pairs", "[classify]") {
  FeatureMatrix fm;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 10; ++i) {
      fm.values.push_back({5.0, 5.0});  // all rows identical: no ratio clears 1.5
      ManifestRecord r;
      r.path = std::to_string(k) + "_" + std::to_string(i);
      r.label = k ? "b" : "a";
      r.instance = std::to_string(i);
      fm.records.push_back(std::move(r));
    }
  }
  const SimpleClassifierModel model = train_simple(fm);
  REQUIRE(model.pairs.size() == 1);
  REQUIRE(model.pairs[0].degenerate);
  REQUIRE(model.pairs[0].features_a.empty());
  REQUIRE(model.pairs[0].features_b.empty());
  // Score ties fall to the lower class index.
  REQUIRE(predict_simple(model, {5.0, 5.0}) == "a");
}

TEST_CASE("the linear classifier separates the blobs and replays exactly", "[classify]") {
  const FeatureMatrix fm = blob_fixture(20, 44);
  const LinearOvOModel model = train_linear(fm);
  REQUIRE(model.classes == std::vector<std::string>{"ant", "bee", "cow"});
  REQUIRE(model.pairs.size() == 3);
  // The hinge optimizer is an approximate subgradient method; on this easy
  // fixture it should get essentially everything right but not provably all.
  REQUIRE(accuracy_linear(model, fm) >= 0.95);
  for (const LinearPairModel& pm : model.pairs) {
    REQUIRE(pm.class_a < pm.class_b);
    REQUIRE(pm.w.size() == 6);
    for (double w : pm.w) REQUIRE(std::isfinite(w));
    REQUIRE(std::isfinite(pm.bias));
  }

  const LinearOvOModel again = train_linear(fm);
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    REQUIRE(model.pairs[p].w == again.pairs[p].w);
    REQUIRE(model.pairs[p].bias == again.pairs[p].bias);
  }
  REQUIRE(model.mean == again.mean);
  REQUIRE(model.inv_std == again.inv_std);
}

TEST_CASE("classifier training rejects unusable inputs", "[classify]") {
  REQUIRE_THROWS_AS(train_simple(FeatureMatrix{}), InvalidInputError);
  REQUIRE_THROWS_AS(train_linear(FeatureMatrix{}), InvalidInputError);
  FeatureMatrix one_class;
  one_class.values.push_back({1.0});
  ManifestRecord r;
  r.path = "x";
  r.label = "only";
  r.instance = "0";
  one_class.records.push_back(r);
  REQUIRE_THROWS_AS(train_simple(one_class), InvalidInputError);
  REQUIRE_THROWS_AS(train_linear(one_class), InvalidInputError);
}

TEST_CASE("accuracy counts exact label matches", "[classify]") {
  const FeatureMatrix fm = blob_fixture(5, 45);
  const SimpleClassifierModel model = train_simple(fm);
  FeatureMatrix shifted = fm;
  // Relabel one row incorrectly; accuracy should drop by exactly one row.
  shifted.records[0].label = "cow";
  const double acc = accuracy_simple(model, shifted);
  REQUIRE(acc == Catch::Approx(14.0 / 15.0).margin(1e-12));
}
