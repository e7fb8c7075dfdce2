#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "ala/kernels/kernels.hpp"
#include "support.hpp"

using namespace ala;
using namespace ala::kernels;
using ala::testing::random_int;

TEST_CASE("pairwise distances: serial and OpenMP agree bit for bit") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const Matrix x = ala::testing::random_matrix(rng, random_int(rng, 1, 90), random_int(rng, 1, 12), -3, 3);
    const Matrix ref = serial::pairwise_sq_distances(x);
    CHECK(ref.diagonal().isZero(0.0));
    CHECK(ref == ref.transpose());
    for (int threads : {2, 3, 8}) CHECK(omp::pairwise_sq_distances(x, threads) == ref);
  }
  Matrix two(2, 2);
  two << 0, 0, 3, 4;
  CHECK(serial::pairwise_sq_distances(two)(0, 1) == 25.0);
}

TEST_CASE("k-NN label hits: serial and OpenMP agree") {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const int n = random_int(rng, 2, 80);
    Matrix x(n, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = random_int(rng, 0, 4);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = random_int(rng, 0, 5);
    const Matrix d = serial::pairwise_sq_distances(x);
    const int k = random_int(rng, 1, n - 1);
    const auto ref = serial::knn_label_hits(d, y, k);
    for (int threads : {2, 5}) CHECK(omp::knn_label_hits(d, y, k, threads) == ref);
    CHECK(knn_label_hits(d, y, k, {4}) == ref);
  }
}

TEST_CASE("grid evaluation: serial and OpenMP agree") {
  auto f = [](double a, double b) { return std::sin(a) * std::exp(b) - a * b; };
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 17; ++i) xs.push_back(-1.0 + i / 8.0);
  for (int j = 0; j < 9; ++j) ys.push_back(j * 0.3);
  const Matrix ref = serial::evaluate_grid(f, xs, ys);
  CHECK(ref(3, 4) == f(xs[3], ys[4]));
  for (int threads : {2, 4, 7}) CHECK(omp::evaluate_grid(f, xs, ys, threads) == ref);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (int threads : {1, 3}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, {threads}, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(20, {threads},
                                 [](int i) {
                                   if (i == 13) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
  parallel_for(0, {4}, [](int) { FAIL("no iterations expected"); });
}
