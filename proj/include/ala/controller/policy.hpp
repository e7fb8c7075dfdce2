#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ala/controller/observation.hpp"
#include "ala/core/network.hpp"
#include "ala/core/optimizer.hpp"
#include "ala/core/rng.hpp"

namespace ala::controller {

inline constexpr int kNumActions = 3;  // {−β, 0, +β}

/// Action index → signed step: 0 ↦ −β, 1 ↦ 0, 2 ↦ +β.
inline double action_delta(int action, double beta) {
  return static_cast<double>(action - 1) * beta;
}

struct PolicyConfig {
  int depth = 2;    // hidden layers
  int width = 32;   // units per hidden layer
  double beta = 0.1;
  core::OptimizerConfig optimizer{core::UpdateRule::kRmsProp, 0.001, 0.0, 0.9, 1e-8};
};

/// The shared loss controller π_θ(a | s): an MLP with ReLU hidden layers
/// and three output logits. One instance serves every loss parameter.
class PolicyNetwork {
 public:
  PolicyNetwork(ObservationLayout layout, const PolicyConfig& config, std::uint64_t seed);
  PolicyNetwork(ObservationLayout layout, core::Network net, double beta,
                core::OptimizerConfig optimizer);

  const ObservationLayout& layout() const { return layout_; }
  double beta() const { return beta_; }
  int depth() const { return net_.spec().num_layers() - 1; }

  core::Network& network() { return net_; }
  const core::Network& network() const { return net_; }
  core::Optimizer& optimizer() { return optimizer_; }

  /// Row-wise log π(· | s) for observations [n × layout.size()].
  Matrix log_probabilities(const Matrix& observations) const;
  Matrix probabilities(const Matrix& observations) const;

 private:
  void check(const Matrix& observations) const;

  ObservationLayout layout_;
  core::Network net_;
  double beta_ = 0.1;
  core::Optimizer optimizer_;
};

struct SampledAction {
  int index = 1;
  double delta = 0.0;
  double log_prob = 0.0;
};

/// Draws a ~ softmax(logits(s)) by inverse CDF on one uniform draw.
SampledAction sample_action(const PolicyNetwork& policy, std::span<const double> observation,
                            Rng& rng);
/// Same for a batch of observations (one uniform draw per row, in order).
std::vector<SampledAction> sample_actions(const PolicyNetwork& policy, const Matrix& observations,
                                          Rng& rng);

/// EMA of rewards: b ← 0.95·b + 0.05·r̄, starting at 0.
class BaselineTracker {
 public:
  explicit BaselineTracker(double decay = 0.95) : decay_(decay) {}
  double value() const { return value_; }
  void update(double mean_reward) { value_ = decay_ * value_ + (1.0 - decay_) * mean_reward; }

 private:
  double decay_;
  double value_ = 0.0;
};

/// ⟨s_t, a_t, r_t, s_{t+1}⟩ plus bookkeeping. For multi-step episodes
/// `return_to_go` is Σ_{k≥t} r_k over the `horizon` remaining steps; for
/// one-step episodes it equals `reward` and horizon is 1.
struct Episode {
  std::vector<double> state;
  int action = 1;
  int reward = 0;
  std::vector<double> next_state;
  int child = 0;
  int parameter = 0;
  long step = 0;
  double return_to_go = 0.0;
  int horizon = 1;
};

/// Advantage Σ_{k≥t}(r_k − b) = return_to_go − horizon·b.
inline double advantage(const Episode& e, double baseline) {
  return e.return_to_go - static_cast<double>(e.horizon) * baseline;
}

/// J = (1/|B|) Σ log π(a|s)·advantage.
double policy_objective(const PolicyNetwork& policy, std::span<const Episode> batch,
                        double baseline);
/// ∇_θ J in Network::parameters() order.
std::vector<Matrix> policy_gradient(const PolicyNetwork& policy, std::span<const Episode> batch,
                                    double baseline);

struct UpdateResult {
  bool applied = false;
  double objective = 0.0;
  double mean_reward = 0.0;
};

/// One ascent step on J with the policy's optimizer, then
/// baseline.update(mean reward of the batch). Empty batch: no-op, returns
/// applied = false.
UpdateResult policy_update(PolicyNetwork& policy, std::span<const Episode> batch,
                           BaselineTracker& baseline);

/// Checkpoint header: {"kind": "policy", "layout": {...}, "network": {...},
/// "beta": β} followed by the parameter tensors. Optimizer buffers are not
/// saved; a loaded policy starts with fresh RMSProp state.
void save_policy(const std::filesystem::path& path, const PolicyNetwork& policy);
PolicyNetwork load_policy(const std::filesystem::path& path);
/// Also rejects a checkpoint whose observation layout differs from
/// `expected` (mode, H, c or ablations) with LoadError.
PolicyNetwork load_policy(const std::filesystem::path& path, const ObservationLayout& expected);

}  // namespace ala::controller
