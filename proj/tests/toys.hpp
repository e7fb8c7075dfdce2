#pragma once

// Small enumerable problems with closed-form answers, shared by the unit
// tests and the acceptance binary.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ala/controller/policy.hpp"

namespace ala::testing {

/// REINFORCE toy: a real policy network with every weight zero except the
/// output bias (0, 0, −3), so that on a zero observation π is a fixed
/// softmax over three actions with rewards (+1, −1, 0) and baseline 0.
/// The exact gradient of J = Σ_a π_a r_a w.r.t. output bias c is
/// π_c (r_c − Σ_a π_a r_a). The empirical side samples `episodes` actions
/// with the library sampler and feeds them to the library estimator.
struct ReinforceToy {
  std::array<double, 3> analytic{};
  std::array<double, 3> empirical{};
  std::array<double, 3> standard_error{};  // of the empirical mean
  double max_other_grad = 0.0;             // |grad| over all other parameters
};

inline constexpr std::array<int, 3> kToyRewards{1, -1, 0};

inline controller::PolicyNetwork reinforce_toy_policy() {
  const auto layout =
      controller::ObservationLayout::for_mode(losses::LossMode::kDistanceMixture, 1);
  controller::PolicyConfig config;
  config.depth = 1;
  config.width = 4;
  controller::PolicyNetwork policy(layout, config, 0);
  for (auto& t : policy.network().parameters()) t.value.setZero();
  policy.network().parameters().back().value(0, 2) = -3.0;
  return policy;
}

inline ReinforceToy reinforce_toy(long episodes, std::uint64_t seed) {
  const controller::PolicyNetwork policy = reinforce_toy_policy();
  const int width = policy.layout().size();
  const Matrix zero = Matrix::Zero(1, width);
  const Matrix pi = policy.probabilities(zero);

  ReinforceToy out;
  double mean_r = 0.0;
  for (int a = 0; a < 3; ++a) mean_r += pi(0, a) * kToyRewards[static_cast<std::size_t>(a)];
  for (int c = 0; c < 3; ++c) {
    out.analytic[static_cast<std::size_t>(c)] =
        pi(0, c) * (kToyRewards[static_cast<std::size_t>(c)] - mean_r);
  }

  Rng rng(seed);
  const auto draws = controller::sample_actions(
      policy, Matrix::Zero(static_cast<Eigen::Index>(episodes), width), rng);
  std::vector<controller::Episode> batch(draws.size());
  std::array<long, 3> counts{};
  for (std::size_t i = 0; i < draws.size(); ++i) {
    auto& e = batch[i];
    e.state.assign(static_cast<std::size_t>(width), 0.0);
    e.next_state = e.state;
    e.action = draws[i].index;
    e.reward = kToyRewards[static_cast<std::size_t>(e.action)];
    e.return_to_go = e.reward;
    ++counts[static_cast<std::size_t>(e.action)];
  }
  const std::vector<Matrix> grads = controller::policy_gradient(policy, batch, 0.0);
  for (std::size_t k = 0; k + 1 < grads.size(); ++k) {
    out.max_other_grad = std::max(out.max_other_grad, grads[k].cwiseAbs().maxCoeff());
  }
  for (int c = 0; c < 3; ++c) {
    out.empirical[static_cast<std::size_t>(c)] = grads.back()(0, c);
    // Per-episode estimate for component c when action a is drawn:
    // r_a (1[a = c] − π_c). Sample variance from the action counts.
    double m1 = 0.0;
    double m2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double g = kToyRewards[static_cast<std::size_t>(a)] * ((a == c ? 1.0 : 0.0) - pi(0, c));
      const double p = static_cast<double>(counts[static_cast<std::size_t>(a)]) / episodes;
      m1 += p * g;
      m2 += p * g * g;
    }
    out.standard_error[static_cast<std::size_t>(c)] = std::sqrt((m2 - m1 * m1) / episodes);
  }
  return out;
}

}  // namespace ala::testing
