#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ala/core/graph.hpp"
#include "ala/core/network.hpp"
#include "ala/core/rng.hpp"
#include "ala/losses/loss_param.hpp"
#include "ala/losses/losses.hpp"
#include "ala/orchestrator/config.hpp"
#include "ala/orchestrator/data.hpp"

namespace ala::orchestrator {

/// What one evaluation pass over a fixed subsample produces.
struct Evaluation {
  double loss = 0.0;    // fixed reference loss (cross-entropy or triplet hinge)
  double metric = 0.0;  // raw metric value, natural orientation
  /// Controller statistics per loss parameter (c values each).
  std::vector<std::vector<double>> stats;
  /// Per loss parameter: statistics undefined this pass (absent class).
  std::vector<char> absent;
  /// Class-correlation tasks: the confusion values on the subsample.
  Matrix confusion;
};

/// Seeded (i, j, same-label) pairs for verification accuracy: half same,
/// half different where possible.
struct PairSample {
  std::vector<int> first;
  std::vector<int> second;
  std::vector<char> same;
};
PairSample sample_pairs(const LabeledSet& set, int count, std::uint64_t seed);

/// One seeded (anchor, positive, negative) triplet per anchor that has a
/// same-class partner.
std::vector<losses::Triplet> sample_triplets(const LabeledSet& set, std::uint64_t seed);

/// Raw metric of `net` on `set` (pairs for verification are drawn with a
/// fixed seed, so the value is a pure function of its inputs).
double evaluate_metric(const TrainRunConfig& config, const core::Network& net,
                       const LabeledSet& set);

/// Fixed reference loss of `net` over all of `set`: mean cross-entropy, or
/// for metric learning the mean triplet hinge over seeded triplets.
double reference_loss(const TrainRunConfig& config, const core::Network& net,
                      const LabeledSet& set);

/// Everything the trainer needs to know about the task: model shape,
/// mini-batch losses, and evaluation on fixed seeded subsamples of the
/// training and validation sets. Never sees the test split.
class TaskContext {
 public:
  TaskContext(const TrainRunConfig& config, const LabeledSet& train, const LabeledSet& val);

  core::NetworkSpec network_spec() const;
  int num_classes() const { return train_.num_classes; }
  int num_parameters() const;
  int stats_per_param() const;

  /// Mean loss of one mini-batch drawn with `rng`.
  core::Var batch_loss(core::Graph& g, const core::Network& net, const core::BoundParams& bound,
                       const losses::LossParameterization& phi, LossKind kind, Rng& rng) const;

  Evaluation evaluate_val(const core::Network& net) const;
  Evaluation evaluate_train(const core::Network& net) const;
  /// The quantity behind the reward, in lower-is-better form.
  double reward_quantity(const core::Network& net) const;

 private:
  struct Probe {
    LabeledSet set;
    std::vector<losses::Triplet> triplets;
    PairSample pairs;
  };
  Probe make_probe(const LabeledSet& source, std::uint64_t seed) const;
  Evaluation evaluate(const core::Network& net, const Probe& probe, bool with_stats) const;

  TrainRunConfig config_;
  const LabeledSet& train_;
  std::vector<std::vector<int>> train_classes_;
  Probe val_probe_;
  Probe train_probe_;
};

/// Test-set access for reporting only. The trainer receives one of these
/// and can ask it for a number to write into the report; no training
/// decision reads that number.
class TestProbe {
 public:
  TestProbe() = default;
  explicit TestProbe(std::function<double(const core::Network&)> measure)
      : measure_(std::move(measure)) {}
  /// NaN when no test set was attached.
  double measure(const core::Network& net) const;

 private:
  std::function<double(const core::Network&)> measure_;
};

TestProbe make_test_probe(const TrainRunConfig& config, LabeledSet test);

}  // namespace ala::orchestrator
