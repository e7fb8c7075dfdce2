#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ala/controller/observation.hpp"
#include "ala/core/optimizer.hpp"
#include "ala/losses/loss_param.hpp"
#include "ala/metrics/metrics.hpp"

namespace ala::orchestrator {

enum class Task { kClassification, kMetricLearning };

/// The loss a child minimizes. kAdaptive follows the run's loss mode and Φ;
/// the others are fixed reference losses for baselines.
enum class LossKind { kAdaptive, kCrossEntropy, kTriplet, kDefaultDistance };

std::string to_string(Task t);
Task task_from_string(const std::string& s);
std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainRunConfig {
  Task task = Task::kClassification;
  losses::LossMode mode = losses::LossMode::kClassCorrelation;

  int inner_iterations = 200;  // K
  int episode_length = 1;      // T
  double gamma = 0.9;
  double beta = 0.1;
  double alpha = 1.0;          // focal distance offset
  double margin = 0.2;         // triplet η
  int children = 10;
  int history = 10;            // H
  int steps = 20;              // controller time steps per run
  int eval_points = 10;        // metric evaluations per step
  int eval_subsample = 1024;

  metrics::RewardSource reward = metrics::RewardSource::kValMetric;
  metrics::MetricKind metric = metrics::MetricKind::kError;
  int recall_k = 1;
  int verification_pairs = 2000;

  int controller_depth = 2;
  int controller_width = 32;
  double policy_lr = 0.001;
  bool replay = true;
  int replay_capacity = 1000;
  controller::Ablation ablation;

  std::vector<int> hidden = {32};
  int embedding_dim = 16;
  int batch_size = 64;
  core::OptimizerConfig model_optimizer{core::UpdateRule::kMomentumSgd, 0.1, 0.9, 0.9, 1e-8};

  /// Loss used by the fixed-loss baseline.
  LossKind fixed_loss = LossKind::kAdaptive;
  int max_recoveries = 3;
  int threads = 1;
  std::uint64_t seed = 0;

  controller::ObservationLayout layout() const;
  /// Inner iterations between two metric evaluations.
  int eval_interval() const;
  /// Number of evaluation points per step (= K / eval_interval()).
  int eval_count() const;

  /// UsageError naming the first offending field.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainRunConfig from_json(const nlohmann::json& j);
};

}  // namespace ala::orchestrator
