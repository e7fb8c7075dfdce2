#pragma once

#include <functional>
#include <vector>

#include "ala/core/types.hpp"

// Data-parallel inner loops. Every kernel has a serial reference
// implementation in ala::kernels::serial and an OpenMP implementation in
// ala::kernels::omp with identical per-element arithmetic, so both produce
// bit-identical results; the dispatchers pick one from an Exec.

namespace ala::kernels {

struct Exec {
  int threads = 1;
  bool parallel() const { return threads > 1; }
};

namespace serial {

/// D(i,j) = Σ_k (x(i,k) − x(j,k))², diagonal exactly 0.
Matrix pairwise_sq_distances(const Matrix& x);

/// hit[q] = 1 iff one of the k nearest neighbours of q (self excluded, ties
/// broken by lower index) shares q's label.
std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k);

/// values(i,j) = f(xs[i], ys[j]).
Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace serial

namespace omp {

Matrix pairwise_sq_distances(const Matrix& x, int threads);
std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k, int threads);
Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     int threads);

/// Runs body(i) for i in [0, n) with static scheduling. The first exception
/// thrown by any iteration is rethrown after the parallel region.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace omp

Matrix pairwise_sq_distances(const Matrix& x, Exec exec = {});
std::vector<char> knn_label_hits(const Matrix& sq_dist, const std::vector<int>& labels,
                                 int k, Exec exec = {});
Matrix evaluate_grid(const std::function<double(double, double)>& f,
                     const std::vector<double>& xs, const std::vector<double>& ys,
                     Exec exec = {});
void parallel_for(int n, Exec exec, const std::function<void(int)>& body);

}  // namespace ala::kernels
