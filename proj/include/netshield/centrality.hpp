#ifndef NETSHIELD_CENTRALITY_HPP
#define NETSHIELD_CENTRALITY_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "netshield/model.hpp"

namespace netshield {

enum class CentralityKind { ell, bonacich };

inline const char* to_string(CentralityKind k) {
  return k == CentralityKind::ell ? "ell" : "bonacich";
}

/// A positive centrality vector stored in decreasing order together with the
/// permutation back to original node indices: perm[r] is the original index
/// of the node at sorted rank r. Ties sort by ascending original index so
/// outputs are deterministic.
struct CentralityVector {
  Vector values;          // sorted, strictly positive
  CentralityKind kind = CentralityKind::ell;
  std::vector<int> perm;  // sorted rank -> original index
  int n = 0;

  /// Values mapped back to original node order.
  Vector to_original() const {
    Vector out(n);
    for (int r = 0; r < n; ++r) out(perm[r]) = values(r);
    return out;
  }

  static CentralityVector from_values(const Vector& raw, CentralityKind kind) {
    const int n = static_cast<int>(raw.size());
    for (int i = 0; i < n; ++i)
      if (!(raw(i) > 0.0))
        throw std::invalid_argument(
            "node " + std::to_string(i) + " has nonpositive centrality " +
            std::to_string(raw(i)) + "; drop zero-influence nodes first");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (raw(a) != raw(b)) return raw(a) > raw(b);
      return a < b;
    });
    CentralityVector cv;
    cv.values = Vector(n);
    for (int r = 0; r < n; ++r) cv.values(r) = raw(order[r]);
    cv.kind = kind;
    cv.perm = std::move(order);
    cv.n = n;
    return cv;
  }
};

/// Column-norm centrality ell_i = ||L e_i||_2, the per-node weight in the
/// total-variance objective.
inline CentralityVector ell_centrality(const InfluenceOperator& op) {
  Vector raw(op.n);
  for (int i = 0; i < op.n; ++i) raw(i) = op.l.col(i).norm();
  return CentralityVector::from_values(raw, CentralityKind::ell);
}

/// Bonacich centrality v = n^{-1} L' 1, the per-node weight in the
/// mean-variance objective. Sums to 1 when L is row-stochastic.
inline CentralityVector bonacich_centrality(const InfluenceOperator& op) {
  Vector raw = op.l.colwise().sum() / static_cast<double>(op.n);
  return CentralityVector::from_values(raw, CentralityKind::bonacich);
}

/// The four distinct centrality values of the degree-normalized undirected
/// star with m leaves under L = (1-beta)(I - beta P)^{-1}.
struct StarClosedForms {
  double v_center = 0.0;
  double v_leaf = 0.0;
  double ell_center = 0.0;
  double ell_leaf = 0.0;
};

/// Closed forms for the star. The expressions are written in terms of the
/// total node count s = n_leaves + 1; that convention is the one that
/// reproduces the dense numerics and is pinned by the cross-validation tests
/// in tests/test_centrality.cpp.
inline StarClosedForms star_closed_forms(int n_leaves, double beta) {
  if (n_leaves < 2)
    throw std::invalid_argument("star_closed_forms: need at least 2 leaves");
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("star_closed_forms: beta must lie in (0,1)");
  const double s = static_cast<double>(n_leaves) + 1.0;
  const double b = beta;
  StarClosedForms out;
  out.v_center = (1.0 + b * (s - 1.0)) / (s * (1.0 + b));
  out.v_leaf = (b + (s - 1.0)) / (s * (s - 1.0) * (1.0 + b));
  out.ell_center = std::sqrt((1.0 + b * b * (s - 1.0)) / ((1.0 + b) * (1.0 + b)));
  out.ell_leaf = std::sqrt(
      (b * b + (s - 1.0) * (2.0 * (2.0 * b * b - b * b * b * b) +
                            s * (1.0 - b * b) * (1.0 - b * b) - 1.0)) /
      ((s - 1.0) * (s - 1.0) * (1.0 + b) * (1.0 + b)));
  return out;
}

/// Norm of the full star centrality vector assembled from its two distinct
/// values: one center entry and n_leaves identical leaf entries.
inline double star_vector_norm(double center, double leaf, int n_leaves) {
  return std::sqrt(center * center + static_cast<double>(n_leaves) * leaf * leaf);
}

}  // namespace netshield

#endif  // NETSHIELD_CENTRALITY_HPP
