#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "ala/controller/action.hpp"
#include "ala/core/network.hpp"
#include "ala/losses/confusion.hpp"
#include "ala/losses/loss_param.hpp"
#include "ala/losses/losses.hpp"
#include "checks.hpp"
#include "support.hpp"

using namespace ala;
using namespace ala::losses;
using ala::core::Graph;
using ala::core::Var;
using ala::testing::gradient_check;
using ala::testing::random_int;
using ala::testing::random_labels;
using ala::testing::random_matrix;
using ala::testing::random_valid_phi;

namespace {

double ala2(double p0, double p1, int label, const Matrix& phi) {
  const std::vector<double> p{p0, p1};
  return ala_classification_loss(p, label, phi);
}

}  // namespace

TEST_CASE("ala_classification_loss: worked examples") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(ala2(1 - 1e-7, 1e-7, 0, eye) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(ala2(0.5, 0.5, 0, eye) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  Matrix phi(2, 2);
  phi << 1, 0.5, 0.5, 1;
  CHECK(ala2(0.5, 0.5, 0, phi) == doctest::Approx(-1.0 / (1.0 + std::pow(2.0, 1.5))).epsilon(1e-12));
  CHECK(ala2(0.5, 0.5, 0, phi) == doctest::Approx(-0.26120).epsilon(1e-4));
}

TEST_CASE("ala_classification_loss: one-hot labels") {
  const std::vector<double> p{0.3, 0.7};
  const std::vector<double> good{0.0, 1.0};
  CHECK(ala_classification_loss(p, good, Matrix::Identity(2, 2)) ==
        ala_classification_loss(p, 1, Matrix::Identity(2, 2)));
  const std::vector<double> two_hot{1.0, 1.0};
  const std::vector<double> soft{0.5, 0.5};
  CHECK_THROWS_AS(ala_classification_loss(p, two_hot, Matrix::Identity(2, 2)), InputError);
  CHECK_THROWS_AS(ala_classification_loss(p, soft, Matrix::Identity(2, 2)), InputError);
  CHECK_THROWS_AS(cross_entropy_loss(p, soft), InputError);
}

TEST_CASE("ala_classification_loss stays in (-1, 0)") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const int k = random_int(rng, 2, 6);
    const Matrix phi = random_valid_phi(rng, k);
    Matrix logits = random_matrix(rng, 1, k, -8, 8);
    const Matrix p = core::softmax_rows(logits);
    const double v = ala_classification_loss(std::span<const double>(p.data(), static_cast<std::size_t>(k)),
                                             random_int(rng, 0, k - 1), phi);
    CHECK(v < 0.0);
    CHECK(v > -1.0);
  }
}

TEST_CASE("cross_entropy_loss: worked examples") {
  const std::vector<double> a{1 - 1e-7, 1e-7};
  const std::vector<double> b{0.5, 0.5};
  const std::vector<double> c{0.25, 0.75};
  CHECK(cross_entropy_loss(a, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(cross_entropy_loss(a, 0) >= 0.0);
  CHECK(cross_entropy_loss(b, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(cross_entropy_loss(b, 1) == doctest::Approx(0.69315).epsilon(1e-5));
  CHECK(cross_entropy_loss(c, 1) == doctest::Approx(0.28768).epsilon(1e-5));
}

TEST_CASE("with identity phi the ALA gradient is a positive multiple of cross-entropy's") {
  // d(−σ(log p_y))/d log p = σ'(log p_y)·d(−log p_y)/d log p; checked on
  // gradients with respect to logits through the softmax.
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const int k = random_int(rng, 2, 8);
    const Matrix logits = random_matrix(rng, 1, k, -3, 3);
    const std::vector<int> label{random_int(rng, 0, k - 1)};
    auto grad = [&](bool ala) {
      Graph g;
      const Var z = g.variable(logits);
      const Var p = g.softmax_rows(z);
      g.backward(ala ? ala_classification_loss(g, p, label, Matrix::Identity(k, k))
                     : cross_entropy_loss(g, p, label));
      return g.grad(z);
    };
    const Matrix ga = grad(true);
    const Matrix gc = grad(false);
    const double cosine = ga.cwiseProduct(gc).sum() / (ga.norm() * gc.norm());
    CHECK(std::abs(cosine - 1.0) <= 1e-10);
    const Matrix probs = core::softmax_rows(logits);
    const double py = probs(0, label[0]);
    const double s = py / (1.0 + py);  // σ(log p_y)
    CHECK((ga - s * (1.0 - s) * gc).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("with identity phi the loss decreases strictly in p_y") {
  const Matrix eye = Matrix::Identity(2, 2);
  double prev = ala2(1e-6, 1 - 1e-6, 0, eye);
  for (int i = 1; i <= 999; ++i) {
    const double py = 1e-6 + (1.0 - 2e-6) * i / 999.0;
    const double v = ala2(py, 1 - py, 0, eye);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("graph forms agree with the scalar definitions") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const int k = random_int(rng, 2, 5);
    const int n = random_int(rng, 1, 6);
    const Matrix probs = core::softmax_rows(random_matrix(rng, n, k, -4, 4));
    const std::vector<int> y = random_labels(rng, n, k);
    const Matrix phi = random_valid_phi(rng, k);
    double ala_ref = 0.0;
    double ce_ref = 0.0;
    for (int r = 0; r < n; ++r) {
      const Matrix row = probs.row(r);
      const std::span<const double> pr(row.data(), static_cast<std::size_t>(k));
      ala_ref += ala_classification_loss(pr, y[static_cast<std::size_t>(r)], phi) / n;
      ce_ref += cross_entropy_loss(pr, y[static_cast<std::size_t>(r)]) / n;
    }
    Graph g;
    const Var p = g.constant(probs);
    CHECK(g.scalar(ala_classification_loss(g, p, y, phi)) == doctest::Approx(ala_ref).epsilon(1e-12));
    CHECK(g.scalar(cross_entropy_loss(g, p, y)) == doctest::Approx(ce_ref).epsilon(1e-12));
  }
}

TEST_CASE("confusion_matrix: worked examples") {
  Matrix probs(2, 2);
  probs << 0.8, 0.2, 0.3, 0.7;
  const ConfusionMatrix cm = confusion_matrix(probs, {0, 1}, 2);
  CHECK(cm.values(0, 0) == doctest::Approx(0.22314).epsilon(1e-5));
  CHECK(cm.values(0, 1) == doctest::Approx(1.60944).epsilon(1e-5));
  CHECK(cm.values(1, 0) == doctest::Approx(1.20397).epsilon(1e-5));
  CHECK(cm.values(1, 1) == doctest::Approx(0.35667).epsilon(1e-5));
  CHECK_FALSE(cm.any_absent());

  const ConfusionMatrix uni = confusion_matrix(Matrix::Constant(4, 2, 0.5), {0, 1, 1, 0}, 2);
  CHECK((uni.values.array() - std::log(2.0)).abs().maxCoeff() <= 1e-15);

  const ConfusionMatrix gap = confusion_matrix(probs, {0, 0}, 2);
  CHECK(gap.absent[1]);
  CHECK(gap.values.row(1).isZero());
  CHECK(gap.counts[0] == 2);
  CHECK(gap.counts[1] == 0);

  CHECK_THROWS_AS(confusion_matrix(probs, {0, 2}, 2), InputError);
  CHECK_THROWS_AS(confusion_matrix(probs, {0, -1}, 2), InputError);
}

TEST_CASE("confusion_matrix commutes with relabeling") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const int k = random_int(rng, 2, 6);
    const int n = random_int(rng, 1, 20);
    const Matrix probs = core::softmax_rows(random_matrix(rng, n, k, -3, 3));
    const std::vector<int> y = random_labels(rng, n, k);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix pp(n, k);
    std::vector<int> py(y.size());
    for (int r = 0; r < n; ++r) {
      py[static_cast<std::size_t>(r)] = perm[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
      for (int j = 0; j < k; ++j) pp(r, perm[static_cast<std::size_t>(j)]) = probs(r, j);
    }
    const ConfusionMatrix a = confusion_matrix(probs, y, k);
    const ConfusionMatrix b = confusion_matrix(pp, py, k);
    for (int i = 0; i < k; ++i) {
      CHECK(a.absent[static_cast<std::size_t>(i)] == b.absent[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      for (int j = 0; j < k; ++j) {
        CHECK(a.values(i, j) == b.values(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
      }
    }
    for (int i = 0; i < k; ++i) {
      if (a.absent[static_cast<std::size_t>(i)]) continue;
      CHECK(a.values.row(i).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("triplet_loss: worked examples") {
  CHECK(triplet_loss(0.7, 0.7, 0.0) == 0.0);
  CHECK(triplet_loss(0.5, 1.0, 0.2) == 0.0);
  CHECK(triplet_loss(1.0, 0.5, 0.2) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK_THROWS_AS(triplet_loss(-0.1, 0.5, 0.2), InputError);
  CHECK_THROWS_AS(triplet_loss(0.1, -0.5, 0.2), InputError);
}

TEST_CASE("distance bank monotonicity on (0, 4]") {
  for (int i = 0; i < kMixtureSize; ++i) {
    double prev = bank_function(i, 1e-3);
    for (int s = 1; s <= 4000; ++s) {
      const double d = 1e-3 + (4.0 - 1e-3) * s / 4000.0;
      const double v = bank_function(i, d);
      if (i < 5) {
        CHECK(v >= prev);
      } else {
        CHECK(v <= prev);
      }
      prev = v;
    }
  }
}

TEST_CASE("distance_mixture_loss: worked examples") {
  std::vector<double> phi0(10, 0.0);
  phi0[0] = 1.0;
  phi0[5] = 1.0;
  CHECK(distance_mixture_loss(1.0, 1.0, phi0) == 1.5);
  CHECK(distance_mixture_loss(2.0, 0.5, phi0) == 5.0);
  const std::vector<double> zero(10, 0.0);
  CHECK(distance_mixture_loss(0.3, 1.7, zero) == 0.0);
  CHECK(distance_mixture_loss(2.9, 0.01, zero) == 0.0);
  bool floored = false;
  const double at_zero = distance_mixture_loss(0.5, 0.0, phi0, &floored);
  CHECK(floored);
  CHECK(at_zero == doctest::Approx(0.25 + 0.5 / kDistanceFloor).epsilon(1e-12));
  floored = false;
  distance_mixture_loss(0.5, 0.5, phi0, &floored);
  CHECK_FALSE(floored);
  CHECK(LossParameterization::default_mixture().values() ==
        Eigen::Map<const Matrix>(phi0.data(), 10, 1));
}

TEST_CASE("distance_mixture_loss is monotone for any weights") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> phi(10);
    for (auto& v : phi) v = uniform01(rng);
    const double fixed = uniform(rng, 0.05, 4.0);
    double prev_p = distance_mixture_loss(0.01, fixed, phi);
    double prev_m = distance_mixture_loss(fixed, 0.01, phi);
    for (int s = 1; s <= 200; ++s) {
      const double d = 0.01 + (4.0 - 0.01) * s / 200.0;
      const double vp = distance_mixture_loss(d, fixed, phi);
      const double vm = distance_mixture_loss(fixed, d, phi);
      CHECK(vp >= prev_p);
      CHECK(vm <= prev_m);
      prev_p = vp;
      prev_m = vm;
    }
  }
}

TEST_CASE("focal_weighting_loss: worked examples") {
  const std::vector<double> none;
  CHECK(focal_weighting_loss(none, none, 1.0, 1.0, 1.0) == 0.0);
  const std::vector<double> one{1.0};
  CHECK(focal_weighting_loss(one, none, 1.0, 1.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> two{2.0};
  CHECK(focal_weighting_loss(none, two, 1.0, 2.0, 1.0) ==
        doctest::Approx(0.5 * std::log1p(std::exp(-2.0))).epsilon(1e-14));
  CHECK(focal_weighting_loss(none, two, 1.0, 2.0, 1.0) == doctest::Approx(0.06343).epsilon(1e-4));
}

TEST_CASE("focal_weighting_loss is strictly monotone in every distance") {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> dp(static_cast<std::size_t>(random_int(rng, 1, 4)));
    std::vector<double> dm(static_cast<std::size_t>(random_int(rng, 1, 4)));
    for (auto& v : dp) v = uniform(rng, 0.0, 2.0);
    for (auto& v : dm) v = uniform(rng, 0.0, 2.0);
    const double p1 = uniform(rng, kFocalMin, 3.0);
    const double p2 = uniform(rng, kFocalMin, 3.0);
    const double base = focal_weighting_loss(dp, dm, p1, p2, 1.0);
    auto bump_p = dp;
    bump_p[uniform_index(rng, bump_p.size())] += 0.01;
    auto bump_m = dm;
    bump_m[uniform_index(rng, bump_m.size())] += 0.01;
    CHECK(focal_weighting_loss(bump_p, dm, p1, p2, 1.0) > base);
    CHECK(focal_weighting_loss(dp, bump_m, p1, p2, 1.0) < base);
  }
}

TEST_CASE("focal term approaches the hinge as the scale grows") {
  const std::vector<double> none;
  for (int s = 0; s <= 400; ++s) {
    const double d = 4.0 * s / 400.0;
    const std::vector<double> dp{d};
    const double soft = focal_weighting_loss(dp, none, kFocalMax, 1.0, 1.0);
    const double gap = soft - std::max(0.0, d - 1.0);
    CHECK(gap >= 0.0);
    CHECK(gap <= std::log(2.0) / kFocalMax + 1e-12);
    CHECK(gap <= 0.07);
  }
}

TEST_CASE("default distance loss equals the mixture at its initial weights bit for bit") {
  Rng rng(7);
  const auto phi0 = LossParameterization::default_mixture();
  const std::span<const double> w(phi0.values().data(), 10);
  for (int t = 0; t < 100; ++t) {
    const Matrix emb = core::l2_normalize_rows(random_matrix(rng, 9, 4));
    const std::vector<Triplet> trips{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {1, 0, 8}};
    auto run = [&](bool mixture) {
      Graph g;
      const Var e = g.variable(emb);
      const auto d = triplet_distances(g, e, trips);
      const Var loss = mixture ? distance_mixture_loss(g, d.d_plus, d.d_minus, w)
                               : default_distance_loss(g, d.d_plus, d.d_minus);
      g.backward(loss);
      return std::make_pair(g.scalar(loss), g.grad(e));
    };
    const auto a = run(true);
    const auto b = run(false);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("loss gradients match finite differences") {
  const auto e = ala::testing::loss_gradient_suite(100, 8);
  CHECK(e.ala < 1e-4);
  CHECK(e.triplet < 1e-4);
  CHECK(e.mixture < 1e-4);
  CHECK(e.focal < 1e-4);
}

TEST_CASE("loss parameterization: initial values and bounds") {
  const auto id = LossParameterization::identity(4);
  CHECK(id.values() == Matrix::Identity(4, 4));
  CHECK(id.num_parameters() == 6);
  CHECK(LossParameterization::initial(LossMode::kClassCorrelation, 8).num_parameters() == 28);
  CHECK(LossParameterization::default_mixture().num_parameters() == 10);
  const auto focal = LossParameterization::default_focal();
  CHECK(focal.num_parameters() == 2);
  CHECK(focal.parameter(0) == 1.0);
  CHECK(focal.parameter(1) == 1.0);
  for (int id_ = 0; id_ < 6; ++id_) {
    const auto [i, j] = id.pair(id_);
    CHECK(i < j);
    CHECK(id.pair_id(i, j) == id_);
  }
}

TEST_CASE("apply_action: worked examples") {
  auto phi = LossParameterization::identity(3);
  const int id = phi.pair_id(0, 2);
  phi.set(id, 0.95);
  controller::apply_action(phi, id, 0.1);
  CHECK(phi.values()(0, 2) == 1.0);
  CHECK(phi.values()(2, 0) == 1.0);

  const auto before = phi;
  controller::apply_action(phi, id, 0.0);
  CHECK(phi == before);

  auto mix = LossParameterization::default_mixture();
  controller::apply_action(mix, 3, -0.1);
  CHECK(mix.parameter(3) == 0.0);

  auto focal = LossParameterization::default_focal();
  focal.set(0, 9.95);
  controller::apply_action(focal, 0, 0.1);
  CHECK(focal.parameter(0) == kFocalMax);
  focal.set(1, 0.15);
  controller::apply_action(focal, 1, -0.1);
  CHECK(focal.parameter(1) == kFocalMin);

  CHECK_THROWS_AS(controller::apply_action(phi, 1, 1, 0.1), UsageError);
  controller::apply_action(phi, 2, 1, -0.1);
  CHECK(phi.values()(1, 2) == -0.1);
  CHECK(phi.values()(2, 1) == -0.1);
  CHECK_THROWS_AS(controller::apply_action(phi, 99, 0.1), UsageError);
  CHECK_THROWS_AS(controller::apply_action(mix, 0, 1, 0.1), UsageError);
}

TEST_CASE("invariants hold after any action sequence") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const int mode = random_int(rng, 0, 2);
    auto phi = LossParameterization::initial(static_cast<LossMode>(mode), random_int(rng, 2, 8));
    for (int step = 0; step < 60; ++step) {
      const int id = random_int(rng, 0, phi.num_parameters() - 1);
      const double delta = 0.1 * (random_int(rng, 0, 2) - 1);
      controller::apply_action(phi, id, delta);
      REQUIRE(phi.valid());
    }
    if (phi.mode() == LossMode::kClassCorrelation) {
      CHECK(phi.values() == phi.values().transpose());
      CHECK(phi.values().diagonal() == Matrix::Ones(phi.num_classes(), 1));
    }
    CHECK(LossParameterization::from_json(phi.to_json()) == phi);
  }
}
