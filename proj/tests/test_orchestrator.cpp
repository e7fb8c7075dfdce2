#include <doctest.h>

#include <set>

#include "ala/harness/dataset.hpp"
#include "ala/orchestrator/trainer.hpp"
#include "support.hpp"

using namespace ala;
using namespace ala::orchestrator;
using losses::LossMode;

namespace {

harness::DatasetSplits small_data(const std::string& kind, int classes, std::uint64_t seed = 3) {
  harness::DatasetSpec spec;
  spec.kind = kind;
  spec.num_classes = classes;
  spec.dim = 6;
  spec.overlap = 0.6;
  spec.n_train = 30 * classes;
  spec.n_val = 20 * classes;
  spec.n_test = 20 * classes;
  spec.seed = seed;
  return harness::generate_dataset(spec);
}

TrainRunConfig small_config() {
  TrainRunConfig c;
  c.inner_iterations = 6;
  c.eval_points = 3;
  c.eval_subsample = 160;
  c.children = 3;
  c.steps = 3;
  c.history = 4;
  c.hidden = {12};
  c.batch_size = 16;
  c.seed = 5;
  return c;
}

TrainRunConfig metric_config(LossMode mode) {
  TrainRunConfig c = small_config();
  c.task = Task::kMetricLearning;
  c.mode = mode;
  c.metric = metrics::MetricKind::kRecallAtK;
  c.embedding_dim = 4;
  return c;
}

bool same_models(const RunReport& a, const RunReport& b) {
  if (a.final_models.size() != b.final_models.size()) return false;
  for (std::size_t c = 0; c < a.final_models.size(); ++c) {
    const auto& pa = a.final_models[c].parameters();
    const auto& pb = b.final_models[c].parameters();
    for (std::size_t k = 0; k < pa.size(); ++k) {
      if (pa[k].value != pb[k].value) return false;
    }
  }
  return true;
}

bool same_params(const controller::PolicyNetwork& a, const controller::PolicyNetwork& b) {
  const auto& pa = a.network().parameters();
  const auto& pb = b.network().parameters();
  for (std::size_t k = 0; k < pa.size(); ++k) {
    if (pa[k].value != pb[k].value) return false;
  }
  return true;
}

/// Output bias (−1e3, 1e3, −1e3): the Δ = 0 action with probability 1.
controller::PolicyNetwork always_hold_policy(const TrainRunConfig& c) {
  controller::PolicyConfig pc;
  pc.depth = c.controller_depth;
  pc.width = c.controller_width;
  controller::PolicyNetwork policy(c.layout(), pc, 1);
  policy.network().parameters().back().value << -1e3, 1e3, -1e3;
  return policy;
}

void check_report_shape(const RunReport& r, const TrainRunConfig& c) {
  CHECK(r.records.size() == static_cast<std::size_t>((c.steps + 1) * c.children));
  long prev = 0;
  for (const auto& rec : r.records) {
    CHECK(rec.step >= prev);
    prev = rec.step;
    CHECK((rec.reward == -1 || rec.reward == 0 || rec.reward == 1));
  }
  CHECK(r.invariant_checks > 0);
  CHECK(r.invariant_failures.empty());
  // Entry 0 belongs to the initial evaluation, which produces no episodes.
  REQUIRE(r.episodes_per_step.size() == static_cast<std::size_t>(c.steps + 1));
  CHECK(r.episodes_per_step[0] == 0);
  for (std::size_t s = 1; s < r.episodes_per_step.size(); ++s) {
    CHECK(r.episodes_per_step[s] + r.skipped_per_step[s] == r.expected_episodes_per_step);
  }
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  auto rejects = [](auto mutate, const std::string& field) {
    TrainRunConfig c;
    mutate(c);
    try {
      c.validate();
      FAIL("accepted invalid " << field);
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  rejects([](TrainRunConfig& c) { c.inner_iterations = 0; }, "inner_iterations");
  rejects([](TrainRunConfig& c) { c.gamma = 1.5; }, "gamma");
  rejects([](TrainRunConfig& c) { c.beta = 0.0; }, "beta");
  rejects([](TrainRunConfig& c) { c.children = 0; }, "children");
  rejects([](TrainRunConfig& c) { c.controller_depth = 4; }, "controller_depth");
  rejects([](TrainRunConfig& c) { c.mode = LossMode::kFocalWeighting; }, "class-correlation");
  rejects([](TrainRunConfig& c) { c.metric = metrics::MetricKind::kRecallAtK; }, "metric");
  TrainRunConfig ok;
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.inner_iterations == 200);
  CHECK(ok.gamma == 0.9);
  CHECK(ok.beta == 0.1);
  CHECK(ok.policy_lr == 0.001);
  CHECK(ok.history == 10);
  CHECK(ok.children == 10);
}

TEST_CASE("config JSON round trip and unknown keys") {
  TrainRunConfig c = metric_config(LossMode::kFocalWeighting);
  c.ablation.enable("delta");
  c.replay = false;
  c.reward = metrics::RewardSource::kTrainLoss;
  const auto j = c.to_json();
  CHECK(TrainRunConfig::from_json(j).to_json() == j);
  auto bad = j;
  bad["nonsense"] = 1;
  CHECK_THROWS_AS(TrainRunConfig::from_json(bad), UsageError);
  CHECK_THROWS_AS(TrainRunConfig::from_json({{"inner_iterations", -1}}), UsageError);
  CHECK(TrainRunConfig::from_json(nlohmann::json::object()).to_json() == TrainRunConfig{}.to_json());
}

TEST_CASE("10 children with 8 classes give 280 episodes per step") {
  const auto data = small_data("confusable-gaussians", 8);
  TrainRunConfig c = small_config();
  c.children = 10;
  c.steps = 2;
  c.inner_iterations = 2;
  Session session(c, data.train, data.val, {}, Driver::kPolicy,
                  controller::PolicyNetwork(c.layout(), controller::PolicyConfig{}, 1), true);
  for (int s = 0; s < 2; ++s) {
    auto episodes = session.train_step();
    const auto skipped = session.report().skipped_per_step.back();
    CHECK(static_cast<long>(episodes.size()) + skipped == 280);
    std::set<std::pair<int, int>> ids;
    for (const auto& e : episodes) {
      ids.insert({e.child, e.parameter});
      CHECK(static_cast<int>(e.state.size()) == c.layout().size());
    }
    CHECK(ids.size() == episodes.size());
    for (const auto& child : session.children()) CHECK(child.inner_iterations == 2L * (s + 1));
    session.learn(std::move(episodes));
  }
  CHECK(session.report().expected_episodes_per_step == 280);
}

TEST_CASE("episode counts for the metric-learning modes") {
  const auto data = small_data("embedding-clusters", 5);
  for (auto [mode, per_child] : {std::pair{LossMode::kDistanceMixture, 10}, std::pair{LossMode::kFocalWeighting, 2}}) {
    TrainRunConfig c = metric_config(mode);
    c.steps = 2;
    const RunReport r = run_training(c, data.train, data.val);
    CHECK(r.expected_episodes_per_step == per_child * c.children);
    check_report_shape(r, c);
    REQUIRE(r.policy.has_value());
  }
}

TEST_CASE("K inner iterations per step") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.inner_iterations = 11;
  Session session(c, data.train, data.val, {}, Driver::kFixed, std::nullopt, false);
  session.train_step();
  session.train_step();
  for (const auto& child : session.children()) CHECK(child.inner_iterations == 22);
}

TEST_CASE("reruns with the same seed are bit-identical") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const auto probe = make_test_probe(c, data.test);
  const RunReport a = run_training(c, data.train, data.val, probe);
  const RunReport b = run_training(c, data.train, data.val, probe);
  CHECK(a.records == b.records);
  CHECK(same_models(a, b));
  REQUIRE(a.policy.has_value());
  CHECK(same_params(*a.policy, *b.policy));
  check_report_shape(a, c);

  c.seed = 6;
  const RunReport other = run_training(c, data.train, data.val, probe);
  CHECK_FALSE(same_models(a, other));
}

TEST_CASE("zero steps report only the initial evaluation") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.steps = 0;
  const RunReport r = run_training(c, data.train, data.val);
  CHECK(r.records.size() == static_cast<std::size_t>(c.children));
  for (const auto& rec : r.records) CHECK(rec.step == 0);
  CHECK(r.policy_updates == 0);
}

TEST_CASE("single-child runs") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.children = 1;
  const RunReport r = run_training(c, data.train, data.val);
  check_report_shape(r, c);
  CHECK(r.final_models.size() == 1);
  CHECK(r.policy_updates == c.steps);
}

TEST_CASE("multi-step episodes and reward sources") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.episode_length = 2;
  c.steps = 4;
  check_report_shape(run_training(c, data.train, data.val), c);
  c.episode_length = 1;
  for (auto src : {metrics::RewardSource::kTrainLoss, metrics::RewardSource::kTrainMetric,
                   metrics::RewardSource::kValLoss}) {
    c.reward = src;
    check_report_shape(run_training(c, data.train, data.val), c);
  }
  c.metric = metrics::MetricKind::kAucpr;
  c.reward = metrics::RewardSource::kValMetric;
  check_report_shape(run_training(c, data.train, data.val), c);
}

TEST_CASE("a policy that always holds reproduces the fixed-loss run") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const auto probe = make_test_probe(c, data.test);
  const RunReport fixed = run_baseline(c, Driver::kFixed, data.train, data.val, probe);
  const RunReport held = run_transfer(c, always_hold_policy(c), false, data.train, data.val, probe);
  CHECK(same_models(fixed, held));
  REQUIRE(fixed.records.size() == held.records.size());
  for (std::size_t i = 0; i < fixed.records.size(); ++i) {
    CHECK(fixed.records[i].val_metric == held.records[i].val_metric);
    CHECK(fixed.records[i].train_loss == held.records[i].train_loss);
    CHECK(fixed.records[i].phi == held.records[i].phi);
  }
}

TEST_CASE("the test probe never influences training") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const RunReport with = run_training(c, data.train, data.val, make_test_probe(c, data.test));
  const RunReport without = run_training(c, data.train, data.val);
  const RunReport bogus =
      run_training(c, data.train, data.val, TestProbe([](const core::Network&) { return 0.5; }));
  CHECK(same_models(with, without));
  CHECK(same_models(with, bogus));
  CHECK(std::isnan(without.records.front().test_metric));
}

TEST_CASE("frozen transfer keeps theta, finetuning moves it") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const controller::PolicyNetwork start(c.layout(), controller::PolicyConfig{}, 7);
  const RunReport frozen = run_transfer(c, start, false, data.train, data.val);
  REQUIRE(frozen.policy.has_value());
  CHECK(same_params(*frozen.policy, start));
  CHECK(frozen.policy_updates == 0);
  const RunReport tuned = run_transfer(c, start, true, data.train, data.val);
  REQUIRE(tuned.policy.has_value());
  CHECK_FALSE(same_params(*tuned.policy, start));
  CHECK(tuned.policy_updates == c.steps);
}

TEST_CASE("a policy learned on 8 classes drives a 12-class run") {
  TrainRunConfig c = small_config();
  c.children = 2;
  c.steps = 2;
  const auto eight = small_data("confusable-gaussians", 8);
  const RunReport source = run_training(c, eight.train, eight.val);
  REQUIRE(source.policy.has_value());
  const auto twelve = small_data("confusable-gaussians", 12);
  const RunReport target = run_transfer(c, *source.policy, false, twelve.train, twelve.val);
  CHECK(target.expected_episodes_per_step == 2 * 66);
  check_report_shape(target, c);
  CHECK(static_cast<int>(target.records.back().phi.size()) == 66);
}

TEST_CASE("transfer rejects a policy with another layout before training") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const controller::PolicyNetwork mixture(
      controller::ObservationLayout::for_mode(LossMode::kDistanceMixture, c.history),
      controller::PolicyConfig{}, 1);
  CHECK_THROWS_AS(run_transfer(c, mixture, false, data.train, data.val), LoadError);
  TrainRunConfig bad = c;
  bad.children = 0;
  CHECK_THROWS_AS(run_training(bad, data.train, data.val), UsageError);
}

TEST_CASE("baselines") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.steps = 4;

  const RunReport fixed = run_baseline(c, Driver::kFixed, data.train, data.val);
  for (const auto& rec : fixed.records) {
    for (double v : rec.phi) CHECK(v == 0.0);
  }
  CHECK_FALSE(fixed.policy.has_value());

  const RunReport random = run_baseline(c, Driver::kRandomPhi, data.train, data.val);
  bool moved = false;
  for (const auto& rec : random.records) {
    for (double v : rec.phi) {
      CHECK(std::abs(v) <= 0.1);
      moved = moved || v != 0.0;
    }
  }
  CHECK(moved);
  check_report_shape(random, c);

  const RunReport confusion = run_baseline(c, Driver::kConfusionPhi, data.train, data.val);
  for (const auto& rec : confusion.records) {
    for (double v : rec.phi) CHECK((v <= 0.0 && v >= -1.0));
  }
  check_report_shape(confusion, c);

  const RunReport bandit = run_baseline(c, Driver::kBandit, data.train, data.val);
  CHECK_FALSE(bandit.policy.has_value());
  CHECK(bandit.policy_updates == 0);
  check_report_shape(bandit, c);

  const auto clusters = small_data("embedding-clusters", 5);
  const TrainRunConfig m = metric_config(LossMode::kDistanceMixture);
  check_report_shape(run_baseline(m, Driver::kBandit, clusters.train, clusters.val), m);
  CHECK_THROWS_AS(baseline_from_string("greedy"), UsageError);
  CHECK_THROWS_AS(run_baseline(c, Driver::kPolicy, data.train, data.val), UsageError);
}

TEST_CASE("Phi invariants hold along ALA runs") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  c.beta = 0.5;  // large steps reach the bounds quickly
  c.steps = 8;
  const RunReport r = run_training(c, data.train, data.val);
  check_report_shape(r, c);
  for (const auto& rec : r.records) {
    for (double v : rec.phi) CHECK((v >= -1.0 && v <= 1.0));
  }
  for (const auto& child_phi : {r.records.back().phi}) CHECK(child_phi.size() == 6);
}

TEST_CASE("children trained on worker threads match the single-thread run") {
  const auto data = small_data("confusable-gaussians", 4);
  TrainRunConfig c = small_config();
  const auto probe = make_test_probe(c, data.test);
  const RunReport serial = run_training(c, data.train, data.val, probe);
  c.threads = 3;
  const RunReport parallel = run_training(c, data.train, data.val, probe);
  CHECK(serial.records == parallel.records);
  CHECK(same_models(serial, parallel));
}
