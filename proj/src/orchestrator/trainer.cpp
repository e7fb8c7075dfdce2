#include "ala/orchestrator/trainer.hpp"

#include <cmath>

#include "ala/controller/action.hpp"
#include "ala/kernels/kernels.hpp"
#include "ala/metrics/metrics.hpp"

namespace ala::orchestrator {

using controller::Episode;

std::string to_string(Driver d) {
  switch (d) {
    case Driver::kPolicy: return "ala";
    case Driver::kFixed: return "fixed";
    case Driver::kRandomPhi: return "random-phi";
    case Driver::kConfusionPhi: return "confusion-phi";
    case Driver::kBandit: return "bandit";
  }
  return "?";
}

Driver baseline_from_string(const std::string& s) {
  if (s == "fixed") return Driver::kFixed;
  if (s == "random-phi") return Driver::kRandomPhi;
  if (s == "confusion-phi") return Driver::kConfusionPhi;
  if (s == "bandit") return Driver::kBandit;
  throw UsageError("unknown baseline mode '" + s + "' (fixed|random-phi|confusion-phi|bandit)");
}

namespace {

controller::PolicyConfig policy_config(const TrainRunConfig& c) {
  controller::PolicyConfig pc;
  pc.depth = c.controller_depth;
  pc.width = c.controller_width;
  pc.beta = c.beta;
  pc.optimizer = {core::UpdateRule::kRmsProp, c.policy_lr, 0.0, 0.9, 1e-8};
  return pc;
}

std::vector<double> flat_phi(const losses::LossParameterization& phi) {
  std::vector<double> out(static_cast<std::size_t>(phi.num_parameters()));
  for (int p = 0; p < phi.num_parameters(); ++p) out[static_cast<std::size_t>(p)] = phi.parameter(p);
  return out;
}

}  // namespace

Session::Session(const TrainRunConfig& config, const LabeledSet& train, const LabeledSet& val,
                 TestProbe test, Driver driver, std::optional<controller::PolicyNetwork> policy,
                 bool learn_policy)
    : config_(config),
      task_(config, train, val),
      test_(std::move(test)),
      driver_(driver),
      learn_policy_(learn_policy),
      policy_(std::move(policy)),
      replay_(static_cast<std::size_t>(config.replay_capacity),
              derive_seed(config.seed, kStreamReplay)) {
  if (driver_ == Driver::kPolicy) {
    if (!policy_) throw UsageError("policy-driven run needs a policy");
    if (!(policy_->layout() == config_.layout())) {
      throw LoadError("policy layout " + policy_->layout().to_json().dump() +
                      " does not match the run's layout " + config_.layout().to_json().dump());
    }
  } else {
    policy_.reset();
    learn_policy_ = false;
  }
  if (driver_ == Driver::kConfusionPhi && config_.mode != losses::LossMode::kClassCorrelation) {
    throw UsageError("confusion-phi baseline needs the class-correlation loss mode");
  }

  report_.kind = to_string(driver_);
  report_.config = config_;
  if (driver_ == Driver::kPolicy) {
    report_.expected_episodes_per_step =
        static_cast<long>(config_.children) * task_.num_parameters();
  }

  children_.resize(static_cast<std::size_t>(config_.children));
  std::vector<StepRecord> records(children_.size());
  kernels::parallel_for(config_.children, {config_.threads}, [&](int c) {
    init_child(c);
    records[static_cast<std::size_t>(c)] = make_record(children_[static_cast<std::size_t>(c)], c);
  });
  report_.records = std::move(records);
  report_.episodes_per_step.push_back(0);
  report_.skipped_per_step.push_back(0);
  check_invariants(nullptr);
}

void Session::init_child(int index) {
  ChildModel& ch = children_[static_cast<std::size_t>(index)];
  const auto c = static_cast<std::uint64_t>(index);
  ch.net = core::Network(task_.network_spec(), derive_seed(config_.seed, kStreamChildInit, c));
  ch.optimizer = core::Optimizer(config_.model_optimizer, ch.net.parameters());
  ch.data_rng.seed(derive_seed(config_.seed, kStreamChildData, c));
  ch.action_rng.seed(derive_seed(config_.seed, kStreamChildAction, c));
  ch.phi = losses::LossParameterization::initial(config_.mode, task_.num_classes());
  ch.trackers.assign(static_cast<std::size_t>(task_.num_parameters()),
                     controller::StatTracker(config_.history, task_.stats_per_param()));
  ch.last_move.assign(static_cast<std::size_t>(task_.num_parameters()), 0.0);

  const Evaluation ev = task_.evaluate_val(ch.net);
  push_stats(ch, ev);
  ch.last_eval = ev;
  // M_0: the pre-step value held over a whole step's evaluation points.
  const std::vector<double> flat(static_cast<std::size_t>(config_.eval_count()),
                                 task_.reward_quantity(ch.net));
  ch.discounted = metrics::discounted_metric(flat, config_.gamma);
}

void Session::push_stats(ChildModel& child, const Evaluation& ev) {
  for (std::size_t p = 0; p < child.trackers.size(); ++p) {
    if (!ev.absent[p]) child.trackers[p].push(ev.stats[p]);
  }
}

std::vector<double> Session::observe(const ChildModel& child, int parameter,
                                     long iteration) const {
  const auto& tracker = child.trackers[static_cast<std::size_t>(parameter)];
  return controller::build_observation(config_.layout(), tracker.history(),
                                       tracker.running_mean(), child.phi.parameter(parameter),
                                       iteration, std::max(1, config_.steps));
}

StepRecord Session::make_record(const ChildModel& child, int index) const {
  StepRecord r;
  r.step = step_;
  r.child = index;
  r.train_loss = task_.evaluate_train(child.net).loss;
  r.val_loss = child.last_eval.loss;
  r.val_metric = child.last_eval.metric;
  r.test_metric = test_.measure(child.net);
  r.discounted = child.discounted;
  r.reward = child.last_reward;
  r.phi = flat_phi(child.phi);
  return r;
}

void Session::drive_baseline(ChildModel& ch) {
  const int params = task_.num_parameters();
  const double beta = config_.beta;
  switch (driver_) {
    case Driver::kPolicy:
    case Driver::kFixed:
      return;
    case Driver::kRandomPhi: {
      const auto base = losses::LossParameterization::initial(config_.mode, task_.num_classes());
      ch.phi = base;
      for (int p = 0; p < params; ++p) {
        ch.phi.set(p, base.parameter(p) + uniform(ch.action_rng, -0.1, 0.1));
      }
      return;
    }
    case Driver::kConfusionPhi: {
      const Matrix& c = ch.last_eval.confusion;
      const Matrix sym = 0.5 * (c + c.transpose());
      double max_off = 0.0;
      for (int p = 0; p < params; ++p) {
        if (ch.last_eval.absent[static_cast<std::size_t>(p)]) continue;
        const auto [i, j] = ch.phi.pair(p);
        max_off = std::max(max_off, sym(i, j));
      }
      for (int p = 0; p < params; ++p) {
        if (ch.last_eval.absent[static_cast<std::size_t>(p)]) continue;
        const auto [i, j] = ch.phi.pair(p);
        ch.phi.set(p, max_off > 0.0 ? -std::clamp(sym(i, j) / max_off, 0.0, 1.0) : 0.0);
      }
      return;
    }
    case Driver::kBandit: {
      for (int p = 0; p < params; ++p) {
        const auto pi = static_cast<std::size_t>(p);
        if (config_.mode == losses::LossMode::kClassCorrelation) {
          if (ch.last_eval.absent[pi]) continue;
          const auto& tracker = ch.trackers[pi];
          const auto& now = tracker.history().back();
          const auto& mean = tracker.running_mean();
          const double phi = ch.phi.parameter(p);
          double delta = 0.0;
          if (now[0] + now[1] > mean[0] + mean[1]) {
            delta = -beta;
          } else if (phi != 0.0) {
            delta = -std::copysign(std::min(beta, std::abs(phi)), phi);
          }
          controller::apply_action(ch.phi, p, delta);
        } else {
          double move = beta;
          if (ch.last_move[pi] != 0.0) {
            move = ch.last_reward > 0 ? ch.last_move[pi] : -ch.last_move[pi];
          }
          controller::apply_action(ch.phi, p, move);
          ch.last_move[pi] = move;
        }
      }
      return;
    }
  }
}

void Session::train_inner(ChildModel& ch, int index, ChildOutput& out,
                          std::vector<double>& series) {
  const LossKind kind = driver_ == Driver::kFixed ? config_.fixed_loss : LossKind::kAdaptive;
  const int interval = config_.eval_interval();
  const auto count = static_cast<std::size_t>(config_.eval_count());
  const std::vector<core::Tensor> saved_params = ch.net.parameters();
  const core::Optimizer saved_optimizer = ch.optimizer;

  for (int attempt = 0; attempt <= config_.max_recoveries; ++attempt) {
    series.clear();
    int failed_at = -1;
    int done = 0;
    for (int k = 0; k < config_.inner_iterations; ++k) {
      core::Graph g;
      const core::BoundParams bound = ch.net.bind(g);
      const core::Var loss = task_.batch_loss(g, ch.net, bound, ch.phi, kind, ch.data_rng);
      if (!std::isfinite(g.scalar(loss))) {
        failed_at = k;
        break;
      }
      g.backward(loss);
      ch.optimizer.step(ch.net.parameters(), core::Network::gradients(g, bound));
      ++done;
      if (!ch.net.all_finite()) {
        failed_at = k;
        break;
      }
      if ((k + 1) % interval == 0 && series.size() < count) {
        series.push_back(task_.reward_quantity(ch.net));
      }
    }
    ch.inner_iterations += done;
    if (failed_at < 0) return;

    ch.net.parameters() = saved_params;
    ch.optimizer = saved_optimizer;
    ch.inner_iterations -= done;
    out.events.push_back("step " + std::to_string(step_ + 1) + " child " +
                         std::to_string(index) + ": non-finite loss at inner iteration " +
                         std::to_string(failed_at) + ", restored step-start checkpoint (attempt " +
                         std::to_string(attempt + 1) + ")");
  }
  throw InvariantError("child " + std::to_string(index) + " diverged at step " +
                       std::to_string(step_ + 1) + " after " +
                       std::to_string(config_.max_recoveries) + " recoveries");
}

void Session::child_step(int index, ChildOutput& out) {
  ChildModel& ch = children_[static_cast<std::size_t>(index)];
  const long t = step_;

  std::vector<int> ids;
  std::vector<std::vector<double>> states;
  std::vector<controller::SampledAction> actions;
  if (driver_ == Driver::kPolicy) {
    for (int p = 0; p < task_.num_parameters(); ++p) {
      if (ch.last_eval.absent[static_cast<std::size_t>(p)]) {
        ++out.skipped;
        continue;
      }
      ids.push_back(p);
      states.push_back(observe(ch, p, t));
    }
    if (!states.empty()) {
      Matrix obs(static_cast<Eigen::Index>(states.size()),
                 static_cast<Eigen::Index>(states.front().size()));
      for (std::size_t k = 0; k < states.size(); ++k) {
        for (std::size_t m = 0; m < states[k].size(); ++m) {
          obs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = states[k][m];
        }
      }
      actions = controller::sample_actions(*policy_, obs, ch.action_rng);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        controller::apply_action(ch.phi, ids[k], actions[k].delta);
      }
    }
  } else {
    drive_baseline(ch);
  }

  std::vector<double> series;
  train_inner(ch, index, out, series);

  const double next = metrics::discounted_metric(series, config_.gamma);
  ch.last_reward = metrics::reward(ch.discounted, next);
  ch.discounted = next;
  ch.rewards.push_back(ch.last_reward);

  const Evaluation ev = task_.evaluate_val(ch.net);
  push_stats(ch, ev);
  ch.last_eval = ev;

  for (std::size_t k = 0; k < ids.size(); ++k) {
    Episode e;
    e.state = std::move(states[k]);
    e.action = actions[k].index;
    e.reward = ch.last_reward;
    e.next_state = observe(ch, ids[k], t + 1);
    e.child = index;
    e.parameter = ids[k];
    e.step = t;
    e.return_to_go = ch.last_reward;
    e.horizon = 1;
    out.episodes.push_back(std::move(e));
  }
}

std::vector<Episode> Session::train_step() {
  std::vector<ChildOutput> outputs(children_.size());
  kernels::parallel_for(config_.children, {config_.threads},
                        [&](int c) { child_step(c, outputs[static_cast<std::size_t>(c)]); });
  ++step_;

  std::vector<Episode> episodes;
  long skipped = 0;
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    for (auto& e : outputs[c].episodes) episodes.push_back(std::move(e));
    skipped += outputs[c].skipped;
    for (auto& msg : outputs[c].events) report_.events.push_back(std::move(msg));
  }
  // Records are built after the step counter moves so they carry step t+1.
  std::vector<StepRecord> records(children_.size());
  kernels::parallel_for(config_.children, {config_.threads}, [&](int c) {
    records[static_cast<std::size_t>(c)] = make_record(children_[static_cast<std::size_t>(c)], c);
  });
  for (auto& r : records) report_.records.push_back(std::move(r));
  report_.episodes_per_step.push_back(static_cast<long>(episodes.size()));
  report_.skipped_per_step.push_back(skipped);
  check_invariants(&episodes);
  return episodes;
}

void Session::check_invariants(const std::vector<Episode>* episodes) {
  auto fail = [&](const std::string& what) {
    report_.invariant_failures.push_back("step " + std::to_string(step_) + ": " + what);
  };
  for (std::size_t c = 0; c < children_.size(); ++c) {
    ++report_.invariant_checks;
    const std::string why = children_[c].phi.invariant_violation();
    if (!why.empty()) fail("child " + std::to_string(c) + " Φ " + why);
    const int r = children_[c].last_reward;
    if (r < -1 || r > 1) fail("reward outside {-1, 0, 1}");
  }
  if (driver_ == Driver::kPolicy && episodes != nullptr) {
    ++report_.invariant_checks;
    const long produced = report_.episodes_per_step.back() + report_.skipped_per_step.back();
    if (produced != report_.expected_episodes_per_step) {
      fail("episode count " + std::to_string(produced) + " != children × parameters " +
           std::to_string(report_.expected_episodes_per_step));
    }
    for (const auto& e : *episodes) {
      if (e.reward < -1 || e.reward > 1) fail("episode reward outside {-1, 0, 1}");
      if (e.state.size() != static_cast<std::size_t>(config_.layout().size()) ||
          e.next_state.size() != e.state.size()) {
        fail("episode observation layout mismatch");
      }
    }
  }
  ++report_.invariant_checks;
  long previous = -1;
  int seen = 0;
  for (const auto& r : report_.records) {
    if (r.step < previous) fail("step index decreased in records");
    if (r.step == previous) {
      ++seen;
    } else {
      if (previous >= 0 && seen != config_.children) fail("missing child records");
      seen = 1;
    }
    previous = r.step;
  }
}

void Session::learn(std::vector<Episode> episodes) {
  if (!policy_ || !learn_policy_) return;
  if (config_.episode_length == 1) {
    update_policy(std::move(episodes));
    return;
  }
  for (auto& e : episodes) pending_.push_back(std::move(e));
  const bool window_closed =
      step_ % config_.episode_length == 0 || step_ >= static_cast<long>(config_.steps);
  if (!window_closed) return;
  for (auto& e : pending_) {
    const auto& rewards = children_[static_cast<std::size_t>(e.child)].rewards;
    double total = 0.0;
    for (long s = e.step; s < step_; ++s) total += rewards[static_cast<std::size_t>(s)];
    e.return_to_go = total;
    e.horizon = static_cast<int>(step_ - e.step);
  }
  std::vector<Episode> window;
  window.swap(pending_);
  update_policy(std::move(window));
}

void Session::update_policy(std::vector<Episode> fresh) {
  if (fresh.empty()) {
    report_.events.push_back("step " + std::to_string(step_) +
                             ": no episodes, policy update skipped");
    return;
  }
  std::vector<Episode> batch = fresh;
  if (config_.replay) {
    // Replay is drawn before this step's episodes enter memory.
    for (auto& e : replay_.sample(fresh.size())) batch.push_back(std::move(e));
    for (auto& e : fresh) replay_.push(std::move(e));
  }
  controller::policy_update(*policy_, batch, baseline_);
  ++report_.policy_updates;
}

RunReport Session::finish() {
  RunReport out = std::move(report_);
  out.final_models.clear();
  for (const auto& ch : children_) out.final_models.push_back(ch.net);
  if (policy_) out.policy = *policy_;
  report_ = RunReport{};
  return out;
}

namespace {

RunReport drive(Session& session, const TrainRunConfig& config) {
  for (int t = 0; t < config.steps; ++t) session.learn(session.train_step());
  return session.finish();
}

}  // namespace

RunReport run_training(const TrainRunConfig& config, const LabeledSet& train,
                       const LabeledSet& val, const TestProbe& test) {
  config.validate();
  controller::PolicyNetwork policy(config.layout(), policy_config(config),
                                   derive_seed(config.seed, kStreamPolicyInit));
  Session session(config, train, val, test, Driver::kPolicy, std::move(policy), true);
  return drive(session, config);
}

RunReport run_baseline(const TrainRunConfig& config, Driver mode, const LabeledSet& train,
                       const LabeledSet& val, const TestProbe& test) {
  if (mode == Driver::kPolicy) throw UsageError("run_baseline: the policy driver is not a baseline");
  Session session(config, train, val, test, mode, std::nullopt, false);
  return drive(session, config);
}

RunReport run_transfer(const TrainRunConfig& config, controller::PolicyNetwork policy,
                       bool finetune, const LabeledSet& train, const LabeledSet& val,
                       const TestProbe& test) {
  config.validate();
  if (!(policy.layout() == config.layout())) {
    throw LoadError("policy layout " + policy.layout().to_json().dump() +
                    " does not match the run's layout " + config.layout().to_json().dump());
  }
  // Finetuning uses this run's learning rate with fresh optimizer state.
  const double beta = policy.beta();
  controller::PolicyNetwork fitted(policy.layout(), std::move(policy.network()), beta,
                                   policy_config(config).optimizer);
  Session session(config, train, val, test, Driver::kPolicy, std::move(fitted), finetune);
  RunReport report = drive(session, config);
  report.kind = finetune ? "transfer-finetune" : "transfer-frozen";
  return report;
}

}  // namespace ala::orchestrator
