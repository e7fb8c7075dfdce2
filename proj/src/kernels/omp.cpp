#include <omp.h>

#include <exception>
#include <mutex>

#include "ala/kernels/kernels.hpp"

namespace ala::kernels {
namespace detail {
void distances_from(const Matrix& x, Eigen::Index i, Matrix& d);
char knn_hit_for_query(const Matrix& sq_dist, const std::vector<int>& labels, int k,
                       Eigen::Index q);
}  // namespace detail

namespace omp {

Matrix pairwise_sq_distances(const Matrix& x, int threads) {
  const Eigen::Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  // Iteration i owns d(j, i) and d(i, j) for j > i, so no two threads
  // touch one cell.
#pragma omp parallel for num_threads(threads) schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) detail::distances_from(x, i, d);
  return d;
}

std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k, int threads) {
  const Eigen::Index n = sq_dist.rows();
  std::vector<char> hits(static_cast<std::size_t>(n), 0);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (Eigen::Index q = 0; q < n; ++q) {
    hits[q] = detail::knn_hit_for_query(sq_dist, labels, k, q);
  }
  return hits;
}

Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     int threads) {
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto ny = static_cast<Eigen::Index>(ys.size());
  Matrix out(nx, ny);
  parallel_for(static_cast<int>(nx * ny), threads, [&](int cell) {
    const Eigen::Index i = cell / ny;
    const Eigen::Index j = cell % ny;
    out(i, j) = f(xs[i], ys[j]);
  });
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  std::exception_ptr first;
  std::mutex mu;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace omp

Matrix pairwise_sq_distances(const Matrix& x, Exec exec) {
  return exec.parallel() ? omp::pairwise_sq_distances(x, exec.threads)
                         : serial::pairwise_sq_distances(x);
}

std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k, Exec exec) {
  return exec.parallel() ? omp::knn_label_hits(sq_dist, labels, k, exec.threads)
                         : serial::knn_label_hits(sq_dist, labels, k);
}

Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     Exec exec) {
  return exec.parallel() ? omp::evaluate_grid(f, xs, ys, exec.threads)
                         : serial::evaluate_grid(f, xs, ys);
}

void parallel_for(int n, Exec exec, const std::function<void(int)>& body) {
  if (exec.parallel()) {
    omp::parallel_for(n, exec.threads, body);
    return;
  }
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace ala::kernels
