#pragma once

// Representational analyses over feature matrices: dissimilarity matrices,
// agglomerative clustering with majority labels, mutual-information feature
// selection, and the per-class feature overlap table.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "spikevis/error.hpp"
#include "spikevis/features.hpp"

namespace spikevis {

namespace detail {

/// Pearson correlation; zero-variance input correlates 0 with everything.
/// The expression is symmetric in its arguments down to the rounding.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a[k] - ma;
    const double db = b[k] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / (std::sqrt(va) * std::sqrt(vb));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Representational dissimilarity matrix

struct Rdm {
  std::vector<std::vector<double>> d;   // square, symmetric, zero diagonal
  std::vector<ManifestRecord> records;  // display order: sorted by (class, instance)
  std::vector<int> zero_variance_rows;  // indices (in display order) with flat rows

  int size() const { return static_cast<int>(d.size()); }
};

/// Pairwise 1 - Pearson over feature rows, ordered by (class, instance).
/// A nonempty view filter restricts the matrix to records of that view.
inline Rdm rdm(const FeatureMatrix& fm, const std::string& view_filter = "") {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < fm.records.size(); ++i) {
    if (view_filter.empty() || fm.records[i].view == view_filter) keep.push_back(i);
  }
  if (keep.size() < 2) throw InvalidInputError("rdm: need at least two rows");
  std::stable_sort(keep.begin(), keep.end(), [&fm](std::size_t a, std::size_t b) {
    const ManifestRecord& ra = fm.records[a];
    const ManifestRecord& rb = fm.records[b];
    return std::tie(ra.label, ra.instance) < std::tie(rb.label, rb.instance);
  });

  Rdm out;
  const int n = static_cast<int>(keep.size());
  out.records.reserve(keep.size());
  for (std::size_t i : keep) out.records.push_back(fm.records[i]);
  out.d.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    const std::vector<double>& row = fm.values[keep[static_cast<std::size_t>(i)]];
    if (detail::pearson(row, row) == 0.0) out.zero_variance_rows.push_back(i);
    for (int j = i + 1; j < n; ++j) {
      const double c =
          detail::pearson(row, fm.values[keep[static_cast<std::size_t>(j)]]);
      out.d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1.0 - c;
      out.d[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1.0 - c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Agglomerative clustering, centroid linkage

struct DendrogramMerge {
  int id = 0;     // new node id (leaves are 0..n-1, merges n..2n-2)
  int left = 0;   // joined node ids, left < right
  int right = 0;
  double distance = 0.0;      // 1 - Pearson between the joined centroids
  std::string majority_label;
  int h = 0;  // rows carrying the majority label
  int c = 0;  // total rows in the merged cluster
};

struct Dendrogram {
  int n_leaves = 0;
  std::vector<std::string> leaf_labels;  // per leaf, in feature row order
  std::vector<DendrogramMerge> merges;   // n_leaves - 1 entries, in merge order
};

/// Repeatedly joins the globally closest pair of clusters (1 - Pearson
/// between centroid means); ties take the smallest (left id, right id).
/// Centroid-linkage heights may invert; they are recorded as computed.
inline Dendrogram hierarchical_cluster(const FeatureMatrix& fm) {
  const int n = fm.rows();
  if (n < 2) throw InvalidInputError("hierarchical_cluster: need at least two rows");

  struct Node {
    int id;
    std::vector<std::size_t> members;  // feature row indices
    std::vector<double> centroid;
  };
  std::vector<Node> active;
  for (int i = 0; i < n; ++i) {
    active.push_back({i, {static_cast<std::size_t>(i)},
                      fm.values[static_cast<std::size_t>(i)]});
  }

  Dendrogram out;
  out.n_leaves = n;
  for (int i = 0; i < n; ++i) out.leaf_labels.push_back(fm.label(i));

  int next_id = n;
  while (active.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double dist = 1.0 - detail::pearson(active[i].centroid, active[j].centroid);
        // Active nodes are kept in ascending id order, so the first strict
        // improvement realizes the (smaller id, smaller id) tie-break.
        if (dist < best) {
          best = dist;
          bi = i;
          bj = j;
        }
      }
    }

    Node merged;
    merged.id = next_id++;
    merged.members = active[bi].members;
    merged.members.insert(merged.members.end(), active[bj].members.begin(),
                          active[bj].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    merged.centroid.assign(fm.values.front().size(), 0.0);
    for (std::size_t m : merged.members) {
      for (std::size_t f = 0; f < merged.centroid.size(); ++f) {
        merged.centroid[f] += fm.values[m][f];
      }
    }
    for (double& v : merged.centroid) v /= static_cast<double>(merged.members.size());

    DendrogramMerge rec;
    rec.id = merged.id;
    rec.left = active[bi].id;
    rec.right = active[bj].id;
    rec.distance = best;
    std::map<std::string, int> counts;
    for (std::size_t m : merged.members) ++counts[fm.records[m].label];
    for (const auto& [label, count] : counts) {
      if (count > rec.h) {  // std::map iterates labels in order, so ties keep
        rec.h = count;      // the lexicographically smallest one
        rec.majority_label = label;
      }
    }
    rec.c = static_cast<int>(merged.members.size());
    out.merges.push_back(std::move(rec));

    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(std::move(merged));  // ids grow, so order stays ascending
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mutual-information feature selection

/// MI (bits) between a binarized feature column and the one-vs-rest label,
/// from a 2x2 contingency table with add-one smoothed cells.
inline double binary_mutual_information(long n11, long n10, long n01, long n00) {
  const double c[2][2] = {{n00 + 1.0, n01 + 1.0}, {n10 + 1.0, n11 + 1.0}};
  const double total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = c[x][y] / total;
      const double px = (c[x][0] + c[x][1]) / total;
      const double py = (c[0][y] + c[1][y]) / total;
      mi += pxy * std::log2(pxy / (px * py));
    }
  }
  return mi;
}

/// Top-k features by mutual information with the "is class c" label,
/// ties by lower feature index. Features are binarized at half their
/// per-column maximum, matching the voting classifier's activity rule.
inline std::vector<int> mi_select(const FeatureMatrix& fm, const std::string& c, int k) {
  const int n_feat = fm.cols();
  if (k < 1 || k > n_feat) {
    throw InvalidInputError("mi_select: k must be in [1, feature count]");
  }
  long n_class = 0;
  for (const ManifestRecord& r : fm.records) n_class += r.label == c ? 1 : 0;
  if (n_class == 0 || n_class == fm.rows()) {
    throw InvalidInputError("mi_select: class '" + c + "' and its complement must both be nonempty");
  }

  std::vector<double> threshold(static_cast<std::size_t>(n_feat), 0.0);
  for (const std::vector<double>& row : fm.values) {
    for (int f = 0; f < n_feat; ++f) threshold[f] = std::max(threshold[f], row[f]);
  }
  for (double& t : threshold) t *= 0.5;

  std::vector<double> mi(static_cast<std::size_t>(n_feat), 0.0);
  for (int f = 0; f < n_feat; ++f) {
    long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
      const bool act = fm.values[i][f] > threshold[f];
      const bool cls = fm.records[i].label == c;
      if (act && cls) ++n11;
      if (act && !cls) ++n10;
      if (!act && cls) ++n01;
      if (!act && !cls) ++n00;
    }
    mi[f] = binary_mutual_information(n11, n10, n01, n00);
  }

  std::vector<int> order(static_cast<std::size_t>(n_feat));
  for (int f = 0; f < n_feat; ++f) order[static_cast<std::size_t>(f)] = f;
  std::stable_sort(order.begin(), order.end(), [&mi](int a, int b) {
    return mi[static_cast<std::size_t>(a)] > mi[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

// ---------------------------------------------------------------------------
// Feature overlap table

struct OverlapTable {
  std::vector<std::string> classes;
  std::vector<std::vector<int>> common;  // |set_a ∩ set_b|, diagonal = k
  int k = 0;
};

inline OverlapTable feature_overlap(const std::vector<std::string>& classes,
                                    const std::vector<std::vector<int>>& selected_sets) {
  if (classes.size() != selected_sets.size() || classes.empty()) {
    throw InvalidInputError("feature_overlap: one selected set per class required");
  }
  OverlapTable out;
  out.classes = classes;
  out.k = static_cast<int>(selected_sets.front().size());
  for (const std::vector<int>& s : selected_sets) {
    if (static_cast<int>(s.size()) != out.k) {
      throw InvalidInputError("feature_overlap: all selected sets must have equal size");
    }
  }
  const std::size_t n = classes.size();
  std::vector<std::set<int>> sets;
  sets.reserve(n);
  for (const std::vector<int>& s : selected_sets) sets.emplace_back(s.begin(), s.end());
  out.common.assign(n, std::vector<int>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    out.common[a][a] = out.k;
    for (std::size_t b = a + 1; b < n; ++b) {
      int shared = 0;
      for (int f : sets[a]) shared += sets[b].count(f) > 0 ? 1 : 0;
      out.common[a][b] = out.common[b][a] = shared;
    }
  }
  return out;
}

}  // namespace spikevis
