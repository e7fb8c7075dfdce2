#pragma once

// Brute-force reference implementations used to check the metrics. They
// avoid sorting altogether and work from pairwise comparisons, so they share
// no code path with the library versions.

#include <cmath>
#include <limits>
#include <vector>

#include "ala/core/types.hpp"

namespace ala::testing {

/// Item j ranks ahead of i when its score is larger, or equal with a lower
/// index. Precision is accumulated at every positive's rank.
inline double oracle_average_precision(const std::vector<double>& s, const std::vector<int>& y) {
  const std::size_t n = s.size();
  std::vector<double> precision_at(n, -1.0);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 0) continue;
    ++positives;
    std::size_t rank = 1;
    std::size_t tp = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool ahead = s[j] > s[i] || (s[j] == s[i] && j < i);
      if (!ahead) continue;
      ++rank;
      if (y[j] != 0) ++tp;
    }
    precision_at[rank - 1] = static_cast<double>(tp) / static_cast<double>(rank);
  }
  double sum = 0.0;
  for (double p : precision_at) {
    if (p >= 0.0) sum += p;
  }
  return sum / static_cast<double>(positives);
}

inline double oracle_sq_distance(const Matrix& x, Eigen::Index a, Eigen::Index b) {
  double d = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) d += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
  return d;
}

/// Neighbour j of q is among the k nearest iff fewer than k other points are
/// strictly closer or equally close with a lower index.
inline double oracle_recall_at_k(const Matrix& x, const std::vector<int>& y, int k) {
  const Eigen::Index n = x.rows();
  int found = 0;
  for (Eigen::Index q = 0; q < n; ++q) {
    bool hit = false;
    for (Eigen::Index j = 0; j < n && !hit; ++j) {
      if (j == q || y[static_cast<std::size_t>(j)] != y[static_cast<std::size_t>(q)]) continue;
      const double dj = oracle_sq_distance(x, q, j);
      int closer = 0;
      for (Eigen::Index p = 0; p < n; ++p) {
        if (p == q || p == j) continue;
        const double dp = oracle_sq_distance(x, q, p);
        if (dp < dj || (dp == dj && p < j)) ++closer;
      }
      hit = closer < k;
    }
    found += hit ? 1 : 0;
  }
  return static_cast<double>(found) / static_cast<double>(n);
}

/// Tries every threshold that can split the data differently: ±∞, each
/// distance itself and the next double above it.
inline double oracle_verification(const std::vector<double>& d, const std::vector<char>& same) {
  std::vector<double> taus{-std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  for (double v : d) {
    taus.push_back(v);
    taus.push_back(std::nextafter(v, std::numeric_limits<double>::infinity()));
  }
  std::size_t best = 0;
  for (double tau : taus) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if ((d[i] < tau) == (same[i] != 0)) ++correct;
    }
    best = std::max(best, correct);
  }
  return static_cast<double>(best) / static_cast<double>(d.size());
}

}  // namespace ala::testing
