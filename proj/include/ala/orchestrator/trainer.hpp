#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ala/controller/observation.hpp"
#include "ala/controller/policy.hpp"
#include "ala/controller/replay.hpp"
#include "ala/core/network.hpp"
#include "ala/core/optimizer.hpp"
#include "ala/losses/loss_param.hpp"
#include "ala/orchestrator/config.hpp"
#include "ala/orchestrator/data.hpp"
#include "ala/orchestrator/report.hpp"
#include "ala/orchestrator/task.hpp"

namespace ala::orchestrator {

/// Who moves Φ between steps.
enum class Driver { kPolicy, kFixed, kRandomPhi, kConfusionPhi, kBandit };

std::string to_string(Driver d);
/// Accepts the CLI baseline names: fixed, random-phi, confusion-phi, bandit.
Driver baseline_from_string(const std::string& s);

/// Seed streams derived from the master seed.
enum SeedStream : std::uint64_t {
  kStreamChildInit = 1,
  kStreamChildData = 2,
  kStreamChildAction = 3,
  kStreamPolicyInit = 4,
  kStreamReplay = 5,
};

/// One main network with its own optimizer, data order, action stream and
/// Φ trajectory.
struct ChildModel {
  core::Network net;
  core::Optimizer optimizer;
  Rng data_rng;
  Rng action_rng;
  losses::LossParameterization phi = losses::LossParameterization::default_focal();
  std::vector<controller::StatTracker> trackers;  // one per loss parameter
  Evaluation last_eval;
  double discounted = 0.0;  // M_t
  int last_reward = 0;
  std::vector<double> last_move;  // bandit: previous step per parameter
  std::vector<int> rewards;       // reward history, for multi-step returns
  long inner_iterations = 0;
};

/// State of one run: the children, the shared policy, the
/// replay memory and the EMA baseline.
class Session {
 public:
  /// `policy` must be set for Driver::kPolicy; when `learn_policy` is false
  /// it is used frozen.
  Session(const TrainRunConfig& config, const LabeledSet& train, const LabeledSet& val,
          TestProbe test, Driver driver, std::optional<controller::PolicyNetwork> policy,
          bool learn_policy);

  /// One controller time step for every child: observe, act, train K
  /// iterations, evaluate, reward. Returns one episode per (child, loss
  /// parameter) except parameters whose statistics are undefined.
  std::vector<controller::Episode> train_step();

  /// Feeds a step's episodes to the policy: with T = 1 this is one update on
  /// fresh + replayed episodes; with T > 1 episodes wait until their window
  /// closes and carry returns-to-go.
  void learn(std::vector<controller::Episode> episodes);

  long step() const { return step_; }
  const std::vector<ChildModel>& children() const { return children_; }
  const controller::PolicyNetwork* policy() const { return policy_ ? &*policy_ : nullptr; }
  const controller::BaselineTracker& baseline() const { return baseline_; }
  const controller::ReplayMemory& replay() const { return replay_; }
  const RunReport& report() const { return report_; }

  /// Moves the report out, attaching final models and the policy.
  RunReport finish();

 private:
  struct ChildOutput {
    std::vector<controller::Episode> episodes;
    long skipped = 0;
    std::vector<std::string> events;
  };

  void init_child(int index);
  void push_stats(ChildModel& child, const Evaluation& ev);
  std::vector<double> observe(const ChildModel& child, int parameter, long iteration) const;
  void child_step(int index, ChildOutput& out);
  void drive_baseline(ChildModel& child);
  void train_inner(ChildModel& child, int index, ChildOutput& out, std::vector<double>& series);
  StepRecord make_record(const ChildModel& child, int index) const;
  void check_invariants(const std::vector<controller::Episode>* episodes);
  void update_policy(std::vector<controller::Episode> fresh);

  TrainRunConfig config_;
  TaskContext task_;
  TestProbe test_;
  Driver driver_;
  bool learn_policy_;
  std::optional<controller::PolicyNetwork> policy_;
  controller::BaselineTracker baseline_;
  controller::ReplayMemory replay_;
  std::vector<ChildModel> children_;
  std::vector<controller::Episode> pending_;  // T > 1 window
  long step_ = 0;
  RunReport report_;
};

/// ALA: fresh policy, learned online.
RunReport run_training(const TrainRunConfig& config, const LabeledSet& train,
                       const LabeledSet& val, const TestProbe& test = {});
/// Fixed-loss, random-Φ, confusion-Φ or contextual-bandit run.
RunReport run_baseline(const TrainRunConfig& config, Driver mode, const LabeledSet& train,
                       const LabeledSet& val, const TestProbe& test = {});
/// Runs with a loaded policy, frozen or finetuned. LoadError before any
/// training when the policy's layout does not fit the config.
RunReport run_transfer(const TrainRunConfig& config, controller::PolicyNetwork policy,
                       bool finetune, const LabeledSet& train, const LabeledSet& val,
                       const TestProbe& test = {});

}  // namespace ala::orchestrator
