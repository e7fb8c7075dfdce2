#include <algorithm>

#include "ala/kernels/kernels.hpp"

namespace ala::kernels {
namespace detail {

// Fills d(j, i) and d(i, j) for every j > i. The loop runs over
// coordinates outside and points inside so it vectorizes across points,
// while each pair still sums its coordinates in order.
void distances_from(const Matrix& x, Eigen::Index i, Matrix& d) {
  const Eigen::Index n = x.rows();
  double* col = d.col(i).data();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double* xc = x.col(c).data();
    const double xi = xc[i];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double diff = xi - xc[j];
      col[j] += diff * diff;
    }
  }
  for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = col[j];
}

char knn_hit_for_query(const Matrix& sq_dist, const std::vector<int>& labels, int k,
                       Eigen::Index q) {
  // Neighbours rank by (distance, index). The top k hold a same-label point
  // iff the best-ranked same-label point has fewer than k points ahead of it.
  const Eigen::Index n = sq_dist.rows();
  const double* row = sq_dist.col(q).data();  // symmetric, so column q is row q
  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != q && labels[j] == labels[q] && (best < 0 || row[j] < row[best])) best = j;
  }
  if (best < 0) return 0;
  int ahead = 0;
  for (Eigen::Index j = 0; j < n && ahead < k; ++j) {
    if (j != q && (row[j] < row[best] || (row[j] == row[best] && j < best))) ++ahead;
  }
  return ahead < k ? 1 : 0;
}

}  // namespace detail

namespace serial {

Matrix pairwise_sq_distances(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) detail::distances_from(x, i, d);
  return d;
}

std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k) {
  const Eigen::Index n = sq_dist.rows();
  std::vector<char> hits(static_cast<std::size_t>(n), 0);
  for (Eigen::Index q = 0; q < n; ++q) hits[q] = detail::knn_hit_for_query(sq_dist, labels, k, q);
  return hits;
}

Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys) {
  Matrix out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) out(i, j) = f(xs[i], ys[j]);
  }
  return out;
}

}  // namespace serial
}  // namespace ala::kernels
