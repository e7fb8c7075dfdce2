#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ala/controller/policy.hpp"
#include "ala/core/network.hpp"
#include "ala/orchestrator/config.hpp"

namespace ala::orchestrator {

/// One child at one step. Step 0 is the evaluation before any training.
struct StepRecord {
  long step = 0;
  int child = 0;
  double train_loss = 0.0;   // fixed reference loss on the training subsample
  double val_loss = 0.0;     // same loss on the validation subsample
  double val_metric = 0.0;   // raw metric on the validation subsample
  double test_metric = 0.0;  // raw metric on the test split (reporting only)
  double discounted = 0.0;   // M_t after this step
  int reward = 0;
  std::vector<double> phi;   // loss parameters by id after this step's action

  bool operator==(const StepRecord&) const = default;
};

struct RunReport {
  std::string kind;  // "ala", "fixed", "random-phi", "confusion-phi", "bandit", "transfer", ...
  TrainRunConfig config;
  std::vector<StepRecord> records;
  std::vector<std::string> events;

  /// Per step: episodes produced, plus those skipped for absent classes.
  std::vector<long> episodes_per_step;
  std::vector<long> skipped_per_step;
  long expected_episodes_per_step = 0;
  long policy_updates = 0;

  long invariant_checks = 0;
  std::vector<std::string> invariant_failures;

  std::vector<core::Network> final_models;
  std::optional<controller::PolicyNetwork> policy;

  long last_step() const;
  /// Test metric of every child at the last step.
  std::vector<double> final_test_metrics() const;
  double final_test_mean() const;
  double final_test_std() const;

  /// Config, counts and final metrics (no per-step records).
  nlohmann::json summary_json() const;
};

}  // namespace ala::orchestrator
