#include "ala/orchestrator/config.hpp"

#include <algorithm>
#include <set>

namespace ala::orchestrator {

std::string to_string(Task t) {
  return t == Task::kClassification ? "classification" : "metric-learning";
}

Task task_from_string(const std::string& s) {
  if (s == "classification") return Task::kClassification;
  if (s == "metric-learning") return Task::kMetricLearning;
  throw UsageError("unknown task '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::kAdaptive: return "adaptive";
    case LossKind::kCrossEntropy: return "cross-entropy";
    case LossKind::kTriplet: return "triplet";
    case LossKind::kDefaultDistance: return "default-distance";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "adaptive") return LossKind::kAdaptive;
  if (s == "cross-entropy") return LossKind::kCrossEntropy;
  if (s == "triplet") return LossKind::kTriplet;
  if (s == "default-distance") return LossKind::kDefaultDistance;
  throw UsageError("unknown loss kind '" + s + "'");
}

controller::ObservationLayout TrainRunConfig::layout() const {
  return controller::ObservationLayout::for_mode(mode, history, ablation);
}

int TrainRunConfig::eval_interval() const {
  return std::max(1, inner_iterations / eval_points);
}

int TrainRunConfig::eval_count() const { return inner_iterations / eval_interval(); }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError("invalid config: " + what);
}

}  // namespace

void TrainRunConfig::validate() const {
  require(inner_iterations >= 1, "inner_iterations must be >= 1");
  require(episode_length >= 1, "episode_length must be >= 1");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(beta > 0.0, "beta must be > 0");
  require(margin >= 0.0, "margin must be >= 0");
  require(children >= 1, "children must be >= 1");
  require(history >= 1, "history must be >= 1");
  require(steps >= 0, "steps must be >= 0");
  require(eval_points >= 1, "eval_points must be >= 1");
  require(eval_subsample >= 2, "eval_subsample must be >= 2");
  require(recall_k >= 1, "recall_k must be >= 1");
  require(verification_pairs >= 2, "verification_pairs must be >= 2");
  require(controller_depth >= 1 && controller_depth <= 3, "controller_depth must be 1, 2 or 3");
  require(controller_width >= 1, "controller_width must be >= 1");
  require(policy_lr > 0.0, "policy_lr must be > 0");
  require(replay_capacity >= 1, "replay_capacity must be >= 1");
  require(!hidden.empty(), "hidden must list at least one layer");
  require(std::all_of(hidden.begin(), hidden.end(), [](int h) { return h >= 1; }),
          "hidden widths must be >= 1");
  require(embedding_dim >= 1, "embedding_dim must be >= 1");
  require(batch_size >= 2, "batch_size must be >= 2");
  require(model_optimizer.learning_rate > 0.0, "model learning rate must be > 0");
  require(max_recoveries >= 0, "max_recoveries must be >= 0");
  require(threads >= 1, "threads must be >= 1");

  if (task == Task::kClassification) {
    require(mode == losses::LossMode::kClassCorrelation,
            "classification uses the class-correlation loss mode");
    require(metric == metrics::MetricKind::kError || metric == metrics::MetricKind::kAucpr,
            "classification metric must be error or aucpr");
    require(fixed_loss == LossKind::kAdaptive || fixed_loss == LossKind::kCrossEntropy,
            "classification fixed_loss must be adaptive or cross-entropy");
  } else {
    require(mode != losses::LossMode::kClassCorrelation,
            "metric learning uses distance-mixture or focal-weighting");
    require(metric == metrics::MetricKind::kRecallAtK ||
                metric == metrics::MetricKind::kVerification,
            "metric-learning metric must be recall@k or verification");
    require(fixed_loss != LossKind::kCrossEntropy,
            "cross-entropy is not a metric-learning loss");
    require(fixed_loss != LossKind::kDefaultDistance ||
                mode == losses::LossMode::kDistanceMixture,
            "default-distance needs distance-mixture mode");
  }
}

nlohmann::json TrainRunConfig::to_json() const {
  return {
      {"task", to_string(task)},
      {"mode", losses::to_string(mode)},
      {"inner_iterations", inner_iterations},
      {"episode_length", episode_length},
      {"gamma", gamma},
      {"beta", beta},
      {"alpha", alpha},
      {"margin", margin},
      {"children", children},
      {"history", history},
      {"steps", steps},
      {"eval_points", eval_points},
      {"eval_subsample", eval_subsample},
      {"reward", metrics::to_string(reward)},
      {"metric", metrics::to_string(metric)},
      {"recall_k", recall_k},
      {"verification_pairs", verification_pairs},
      {"controller_depth", controller_depth},
      {"controller_width", controller_width},
      {"policy_lr", policy_lr},
      {"replay", replay},
      {"replay_capacity", replay_capacity},
      {"ablate", ablation.names()},
      {"hidden", hidden},
      {"embedding_dim", embedding_dim},
      {"batch_size", batch_size},
      {"model_optimizer",
       {{"rule", core::to_string(model_optimizer.rule)},
        {"learning_rate", model_optimizer.learning_rate},
        {"momentum", model_optimizer.momentum},
        {"decay", model_optimizer.decay},
        {"epsilon", model_optimizer.epsilon}}},
      {"fixed_loss", to_string(fixed_loss)},
      {"max_recoveries", max_recoveries},
      {"threads", threads},
      {"seed", seed},
  };
}

TrainRunConfig TrainRunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known = {
      "task", "mode", "inner_iterations", "episode_length", "gamma", "beta", "alpha",
      "margin", "children", "history", "steps", "eval_points", "eval_subsample", "reward",
      "metric", "recall_k", "verification_pairs", "controller_depth", "controller_width",
      "policy_lr", "replay", "replay_capacity", "ablate", "hidden", "embedding_dim",
      "batch_size", "model_optimizer", "fixed_loss", "max_recoveries", "threads", "seed"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw UsageError("unknown config key '" + item.key() + "'");
  }

  TrainRunConfig c;
  try {
    if (j.contains("task")) {
      c.task = task_from_string(j["task"].get<std::string>());
      // Default mode/metric follow the task unless given explicitly.
      if (c.task == Task::kMetricLearning) {
        c.mode = losses::LossMode::kDistanceMixture;
        c.metric = metrics::MetricKind::kRecallAtK;
      }
    }
    if (j.contains("mode")) c.mode = losses::loss_mode_from_string(j["mode"].get<std::string>());
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("inner_iterations", c.inner_iterations);
    get("episode_length", c.episode_length);
    get("gamma", c.gamma);
    get("beta", c.beta);
    get("alpha", c.alpha);
    get("margin", c.margin);
    get("children", c.children);
    get("history", c.history);
    get("steps", c.steps);
    get("eval_points", c.eval_points);
    get("eval_subsample", c.eval_subsample);
    if (j.contains("reward")) c.reward = metrics::reward_source_from_string(j["reward"].get<std::string>());
    if (j.contains("metric")) c.metric = metrics::metric_kind_from_string(j["metric"].get<std::string>());
    get("recall_k", c.recall_k);
    get("verification_pairs", c.verification_pairs);
    get("controller_depth", c.controller_depth);
    get("controller_width", c.controller_width);
    get("policy_lr", c.policy_lr);
    get("replay", c.replay);
    get("replay_capacity", c.replay_capacity);
    if (j.contains("ablate")) {
      for (const auto& name : j["ablate"]) c.ablation.enable(name.get<std::string>());
    }
    get("hidden", c.hidden);
    get("embedding_dim", c.embedding_dim);
    get("batch_size", c.batch_size);
    if (j.contains("model_optimizer")) {
      const auto& o = j["model_optimizer"];
      if (!o.is_object()) throw UsageError("model_optimizer must be an object");
      for (const auto& item : o.items()) {
        static const std::set<std::string> opt_keys = {"rule", "learning_rate", "momentum",
                                                       "decay", "epsilon"};
        if (!opt_keys.count(item.key())) {
          throw UsageError("unknown model_optimizer key '" + item.key() + "'");
        }
      }
      if (o.contains("rule")) c.model_optimizer.rule = core::update_rule_from_string(o["rule"].get<std::string>());
      if (o.contains("learning_rate")) c.model_optimizer.learning_rate = o["learning_rate"].get<double>();
      if (o.contains("momentum")) c.model_optimizer.momentum = o["momentum"].get<double>();
      if (o.contains("decay")) c.model_optimizer.decay = o["decay"].get<double>();
      if (o.contains("epsilon")) c.model_optimizer.epsilon = o["epsilon"].get<double>();
    }
    if (j.contains("fixed_loss")) c.fixed_loss = loss_kind_from_string(j["fixed_loss"].get<std::string>());
    get("max_recoveries", c.max_recoveries);
    get("threads", c.threads);
    get("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ala::orchestrator
