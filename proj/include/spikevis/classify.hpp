#pragma once

// Two classifiers over C2 feature rows:
//  - a probability-ratio voting classifier (binarized activity, per-pair
//    feature subsets, inner-product scores, majority vote), and
//  - a one-vs-one linear max-margin classifier trained by subgradient
//    descent on the regularized hinge loss.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "spikevis/error.hpp"
#include "spikevis/features.hpp"
#include "spikevis/rng.hpp"

namespace spikevis {

namespace detail {

/// Distinct labels, sorted, so class indices don't depend on row order.
inline std::vector<std::string> sorted_classes(const FeatureMatrix& fm) {
  std::vector<std::string> classes;
  for (const ManifestRecord& r : fm.records) {
    if (std::find(classes.begin(), classes.end(), r.label) == classes.end()) {
      classes.push_back(r.label);
    }
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

inline int class_index(const std::vector<std::string>& classes, const std::string& label) {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw InvalidInputError("unknown class label '" + label + "'");
  return static_cast<int>(it - classes.begin());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Probability-ratio voting classifier

struct SimplePairModel {
  int class_a = 0;  // indices into SimpleClassifierModel::classes, a < b
  int class_b = 0;
  double ratio_threshold = 0.0;
  std::vector<int> features_a;  // features favoring a (smoothed p_a/p_b > threshold)
  std::vector<int> features_b;
  std::vector<double> prob_a;  // occurrence probabilities aligned with features_a
  std::vector<double> prob_b;
  bool degenerate = false;  // both selected sets empty at the chosen threshold
};

struct SimpleClassifierModel {
  std::vector<std::string> classes;
  std::vector<double> binarize_threshold;  // per feature: half its training max
  std::vector<SimplePairModel> pairs;
};

constexpr std::array<double, 5> kRatioGrid = {1.5, 2.0, 3.0, 5.0, 10.0};

namespace detail {

/// Pair vote on one row: +1 if side a wins, -1 if side b wins, 0 on a score
/// tie (callers award ties to the lower class index).
inline int simple_pair_vote(const SimplePairModel& pm, const std::vector<double>& row,
                            double* score_a_out = nullptr, double* score_b_out = nullptr) {
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < pm.features_a.size(); ++k) {
    sa += row[static_cast<std::size_t>(pm.features_a[k])] * pm.prob_a[k];
  }
  for (std::size_t k = 0; k < pm.features_b.size(); ++k) {
    sb += row[static_cast<std::size_t>(pm.features_b[k])] * pm.prob_b[k];
  }
  if (score_a_out) *score_a_out = sa;
  if (score_b_out) *score_b_out = sb;
  return sa > sb ? 1 : (sb > sa ? -1 : 0);
}

}  // namespace detail

/// Per unordered class pair: binarize rows (active iff value exceeds half the
/// feature's training max), smooth occurrence counts by add-one, keep the
/// features whose probability ratio clears a threshold picked from a small
/// grid by maximizing the pair's training accuracy.
inline SimpleClassifierModel train_simple(const FeatureMatrix& fm) {
  if (fm.rows() == 0) throw InvalidInputError("train_simple: empty feature matrix");
  SimpleClassifierModel model;
  model.classes = detail::sorted_classes(fm);
  if (model.classes.size() < 2) {
    throw InvalidInputError("train_simple: need at least two classes");
  }
  const int n_feat = fm.cols();

  model.binarize_threshold.assign(static_cast<std::size_t>(n_feat), 0.0);
  for (const std::vector<double>& row : fm.values) {
    for (int f = 0; f < n_feat; ++f) {
      model.binarize_threshold[f] = std::max(model.binarize_threshold[f], row[f]);
    }
  }
  for (double& t : model.binarize_threshold) t *= 0.5;

  // Binarized activity and per-row class index, computed once.
  std::vector<std::vector<char>> active(fm.values.size());
  std::vector<int> row_class(fm.values.size());
  for (std::size_t i = 0; i < fm.values.size(); ++i) {
    active[i].resize(static_cast<std::size_t>(n_feat));
    for (int f = 0; f < n_feat; ++f) {
      active[i][f] = fm.values[i][f] > model.binarize_threshold[f] ? 1 : 0;
    }
    row_class[i] = detail::class_index(model.classes, fm.records[i].label);
  }

  const int n_classes = static_cast<int>(model.classes.size());
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      std::vector<std::size_t> rows_a, rows_b;
      for (std::size_t i = 0; i < fm.values.size(); ++i) {
        if (row_class[i] == a) rows_a.push_back(i);
        if (row_class[i] == b) rows_b.push_back(i);
      }
      // Smoothed occurrence probability per feature and side.
      std::vector<double> pa(static_cast<std::size_t>(n_feat));
      std::vector<double> pb(static_cast<std::size_t>(n_feat));
      for (int f = 0; f < n_feat; ++f) {
        long ca = 0, cb = 0;
        for (std::size_t i : rows_a) ca += active[i][f];
        for (std::size_t i : rows_b) cb += active[i][f];
        pa[f] = (ca + 1.0) / (static_cast<double>(rows_a.size()) + 2.0);
        pb[f] = (cb + 1.0) / (static_cast<double>(rows_b.size()) + 2.0);
      }

      SimplePairModel best;
      long best_correct = -1;
      for (double threshold : kRatioGrid) {
        SimplePairModel pm;
        pm.class_a = a;
        pm.class_b = b;
        pm.ratio_threshold = threshold;
        for (int f = 0; f < n_feat; ++f) {
          if (pa[f] / pb[f] > threshold) {
            pm.features_a.push_back(f);
            pm.prob_a.push_back(pa[f]);
          }
          if (pb[f] / pa[f] > threshold) {
            pm.features_b.push_back(f);
            pm.prob_b.push_back(pb[f]);
          }
        }
        long correct = 0;
        for (std::size_t i : rows_a) {
          if (detail::simple_pair_vote(pm, fm.values[i]) >= 0) ++correct;
        }
        for (std::size_t i : rows_b) {
          if (detail::simple_pair_vote(pm, fm.values[i]) < 0) ++correct;
        }
        if (correct > best_correct) {
          best_correct = correct;
          best = std::move(pm);
        }
      }
      best.degenerate = best.features_a.empty() && best.features_b.empty();
      model.pairs.push_back(std::move(best));
    }
  }
  return model;
}

/// Majority vote over pair decisions; vote ties broken by highest summed pair
/// score, then lowest class index. A tied pair goes to its lower class index.
inline std::string predict_simple(const SimpleClassifierModel& model,
                                  const std::vector<double>& row) {
  std::vector<int> votes(model.classes.size(), 0);
  std::vector<double> total(model.classes.size(), 0.0);
  for (const SimplePairModel& pm : model.pairs) {
    double sa = 0.0, sb = 0.0;
    const int v = detail::simple_pair_vote(pm, row, &sa, &sb);
    total[static_cast<std::size_t>(pm.class_a)] += sa;
    total[static_cast<std::size_t>(pm.class_b)] += sb;
    ++votes[static_cast<std::size_t>(v >= 0 ? pm.class_a : pm.class_b)];
  }
  int winner = 0;
  for (int c = 1; c < static_cast<int>(model.classes.size()); ++c) {
    if (votes[c] > votes[winner] ||
        (votes[c] == votes[winner] && total[c] > total[winner])) {
      winner = c;
    }
  }
  return model.classes[static_cast<std::size_t>(winner)];
}

// ---------------------------------------------------------------------------
// One-vs-one linear max-margin classifier

struct LinearPairModel {
  int class_a = 0;  // decision value > 0 favors class_a, < 0 favors class_b
  int class_b = 0;
  std::vector<double> w;
  double bias = 0.0;
};

struct LinearOvOModel {
  std::vector<std::string> classes;
  std::vector<double> mean;     // per-feature standardization
  std::vector<double> inv_std;  // 1 / max(std, 1e-9)
  std::vector<LinearPairModel> pairs;
};

struct LinearTrainConfig {
  double lambda = 1e-4;  // L2 regularization strength
  int epochs = 200;
  std::uint64_t seed = 17;  // order-shuffling seed; fixed so training is a pure function
};

namespace detail {

inline double pair_decision(const LinearPairModel& pm, const std::vector<double>& x) {
  double f = pm.bias;
  for (std::size_t k = 0; k < pm.w.size(); ++k) f += pm.w[k] * x[k];
  return f;
}

inline std::vector<double> standardize_row(const LinearOvOModel& model,
                                           const std::vector<double>& row) {
  std::vector<double> x(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) {
    x[f] = (row[f] - model.mean[f]) * model.inv_std[f];
  }
  return x;
}

}  // namespace detail

/// Hinge-loss subgradient descent per class pair on standardized features,
/// with 1/(lambda*t) step decay. Fixed seed and epoch count keep training
/// deterministic.
inline LinearOvOModel train_linear(const FeatureMatrix& fm, const LinearTrainConfig& cfg = {}) {
  if (fm.rows() == 0) throw InvalidInputError("train_linear: empty feature matrix");
  LinearOvOModel model;
  model.classes = detail::sorted_classes(fm);
  if (model.classes.size() < 2) {
    throw InvalidInputError("train_linear: need at least two classes");
  }
  const int n_feat = fm.cols();
  const std::size_t n_rows = fm.values.size();

  model.mean.assign(static_cast<std::size_t>(n_feat), 0.0);
  model.inv_std.assign(static_cast<std::size_t>(n_feat), 0.0);
  for (const std::vector<double>& row : fm.values) {
    for (int f = 0; f < n_feat; ++f) model.mean[f] += row[f];
  }
  for (double& m : model.mean) m /= static_cast<double>(n_rows);
  for (const std::vector<double>& row : fm.values) {
    for (int f = 0; f < n_feat; ++f) {
      const double d = row[f] - model.mean[f];
      model.inv_std[f] += d * d;
    }
  }
  for (double& v : model.inv_std) {
    v = 1.0 / std::max(std::sqrt(v / static_cast<double>(n_rows)), 1e-9);
  }

  std::vector<std::vector<double>> x(n_rows);
  std::vector<int> row_class(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    x[i] = detail::standardize_row(model, fm.values[i]);
    row_class[i] = detail::class_index(model.classes, fm.records[i].label);
  }

  const int n_classes = static_cast<int>(model.classes.size());
  int pair_id = 0;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b, ++pair_id) {
      std::vector<std::size_t> rows;
      std::vector<double> y;
      for (std::size_t i = 0; i < n_rows; ++i) {
        if (row_class[i] == a || row_class[i] == b) {
          rows.push_back(i);
          y.push_back(row_class[i] == a ? 1.0 : -1.0);
        }
      }
      LinearPairModel pm;
      pm.class_a = a;
      pm.class_b = b;
      pm.w.assign(static_cast<std::size_t>(n_feat), 0.0);

      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(pair_id)));
      std::vector<std::size_t> order(rows.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      long t = 0;
      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_vec(order, rng);
        for (std::size_t k : order) {
          ++t;
          const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
          const std::vector<double>& xi = x[rows[k]];
          const double margin = y[k] * detail::pair_decision(pm, xi);
          const double shrink = 1.0 - eta * cfg.lambda;  // = 1 - 1/t
          for (double& wf : pm.w) wf *= shrink;
          if (margin < 1.0) {
            const double step = eta * y[k] / static_cast<double>(rows.size());
            for (std::size_t f = 0; f < pm.w.size(); ++f) pm.w[f] += step * xi[f];
            pm.bias += step;
          }
        }
      }
      model.pairs.push_back(std::move(pm));
    }
  }
  return model;
}

/// Majority vote over pair decisions; ties broken by summed signed margins,
/// then lowest class index. A zero decision value goes to the lower index.
inline std::string predict_linear(const LinearOvOModel& model, const std::vector<double>& row) {
  const std::vector<double> x = detail::standardize_row(model, row);
  std::vector<int> votes(model.classes.size(), 0);
  std::vector<double> margin(model.classes.size(), 0.0);
  for (const LinearPairModel& pm : model.pairs) {
    const double f = detail::pair_decision(pm, x);
    margin[static_cast<std::size_t>(pm.class_a)] += f;
    margin[static_cast<std::size_t>(pm.class_b)] -= f;
    ++votes[static_cast<std::size_t>(f >= 0.0 ? pm.class_a : pm.class_b)];
  }
  int winner = 0;
  for (int c = 1; c < static_cast<int>(model.classes.size()); ++c) {
    if (votes[c] > votes[winner] ||
        (votes[c] == votes[winner] && margin[c] > margin[winner])) {
      winner = c;
    }
  }
  return model.classes[static_cast<std::size_t>(winner)];
}

// ---------------------------------------------------------------------------

/// Fraction of rows whose prediction matches the recorded label.
template <typename Model, typename Predict>
inline double classification_accuracy(const Model& model, const FeatureMatrix& fm,
                                      Predict&& predict) {
  if (fm.rows() == 0) throw InvalidInputError("accuracy: empty feature matrix");
  long correct = 0;
  for (int i = 0; i < fm.rows(); ++i) {
    if (predict(model, fm.values[static_cast<std::size_t>(i)]) == fm.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(fm.rows());
}

inline double accuracy_simple(const SimpleClassifierModel& m, const FeatureMatrix& fm) {
  return classification_accuracy(m, fm, [](const auto& mm, const auto& row) {
    return predict_simple(mm, row);
  });
}

inline double accuracy_linear(const LinearOvOModel& m, const FeatureMatrix& fm) {
  return classification_accuracy(m, fm, [](const auto& mm, const auto& row) {
    return predict_linear(mm, row);
  });
}

}  // namespace spikevis
