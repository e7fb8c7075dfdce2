#include "ala/orchestrator/task.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ala/losses/confusion.hpp"
#include "ala/metrics/metrics.hpp"

namespace ala::orchestrator {

namespace {

constexpr std::uint64_t kStreamValProbe = 101;
constexpr std::uint64_t kStreamTrainProbe = 102;
constexpr std::uint64_t kStreamTestPairs = 103;
constexpr std::uint64_t kStreamReferenceTriplets = 104;

std::vector<int> seeded_subsample(std::size_t n, std::size_t take, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (take >= n) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Matrix gather(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
  return out;
}

double row_distance(const Matrix& e, int a, int b) { return (e.row(a) - e.row(b)).norm(); }

double mean_cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double p = std::clamp(probs(static_cast<Eigen::Index>(r), labels[r]), losses::kProbClamp,
                                1.0 - losses::kProbClamp);
    total -= std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace

PairSample sample_pairs(const LabeledSet& set, int count, std::uint64_t seed) {
  PairSample out;
  const auto groups = set.by_class();
  const auto n = set.size();
  if (n < 2) throw UsageError("sample_pairs: need at least 2 examples");
  Rng rng(seed);
  bool any_same = false;
  for (const auto& g : groups) any_same = any_same || g.size() >= 2;
  for (int k = 0; k < count; ++k) {
    const bool want_same = any_same && (k % 2 == 0);
    int a = 0;
    int b = 0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      a = static_cast<int>(uniform_index(rng, n));
      const auto& g = groups[static_cast<std::size_t>(set.y[static_cast<std::size_t>(a)])];
      if (want_same) {
        if (g.size() < 2) continue;
        b = g[uniform_index(rng, g.size())];
        if (b != a) break;
      } else {
        b = static_cast<int>(uniform_index(rng, n));
        if (set.y[static_cast<std::size_t>(b)] != set.y[static_cast<std::size_t>(a)]) break;
      }
    }
    if (a == b) continue;
    out.first.push_back(a);
    out.second.push_back(b);
    out.same.push_back(set.y[static_cast<std::size_t>(a)] == set.y[static_cast<std::size_t>(b)]);
  }
  return out;
}

std::vector<losses::Triplet> sample_triplets(const LabeledSet& set, std::uint64_t seed) {
  std::vector<losses::Triplet> out;
  const auto groups = set.by_class();
  const auto n = set.size();
  Rng rng(seed);
  for (std::size_t a = 0; a < n; ++a) {
    const int label = set.y[a];
    const auto& g = groups[static_cast<std::size_t>(label)];
    if (g.size() < 2 || g.size() == n) continue;
    int p = static_cast<int>(a);
    while (p == static_cast<int>(a)) p = g[uniform_index(rng, g.size())];
    int q = static_cast<int>(a);
    while (set.y[static_cast<std::size_t>(q)] == label) q = static_cast<int>(uniform_index(rng, n));
    out.push_back({static_cast<int>(a), p, q});
  }
  return out;
}

double reference_loss(const TrainRunConfig& config, const core::Network& net,
                      const LabeledSet& set) {
  const Matrix out = net.predict(set.x);
  if (config.task == Task::kClassification) return mean_cross_entropy(out, set.y);
  const auto triplets = sample_triplets(set, derive_seed(0, kStreamReferenceTriplets));
  if (triplets.empty()) throw UsageError("reference_loss: no triplets in set");
  double hinge = 0.0;
  for (const auto& t : triplets) {
    hinge += losses::triplet_loss(row_distance(out, t.anchor, t.positive),
                                  row_distance(out, t.anchor, t.negative), config.margin);
  }
  return hinge / static_cast<double>(triplets.size());
}

double evaluate_metric(const TrainRunConfig& config, const core::Network& net,
                       const LabeledSet& set) {
  const Matrix out = net.predict(set.x);
  switch (config.metric) {
    case metrics::MetricKind::kError:
      return metrics::classification_error(out, set.y);
    case metrics::MetricKind::kAucpr:
      return metrics::aucpr_from_probs(out, set.y);
    case metrics::MetricKind::kRecallAtK:
      return metrics::recall_at_k(out, set.y, config.recall_k, {config.threads});
    case metrics::MetricKind::kVerification: {
      const PairSample pairs =
          sample_pairs(set, config.verification_pairs, derive_seed(0, kStreamTestPairs));
      std::vector<double> d(pairs.same.size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = row_distance(out, pairs.first[k], pairs.second[k]);
      return metrics::verification_accuracy(d, pairs.same);
    }
  }
  throw UsageError("unknown metric");
}

TaskContext::TaskContext(const TrainRunConfig& config, const LabeledSet& train,
                         const LabeledSet& val)
    : config_(config), train_(train) {
  config_.validate();
  train.check();
  val.check();
  if (train.x.cols() != val.x.cols() || train.num_classes != val.num_classes) {
    throw ShapeError("train and validation splits disagree in dimension or class count");
  }
  train_classes_ = train.by_class();
  if (config_.task == Task::kMetricLearning) {
    const bool has_pairs = std::any_of(train_classes_.begin(), train_classes_.end(),
                                       [](const auto& g) { return g.size() >= 2; });
    if (!has_pairs) throw InputError("metric learning needs a class with >= 2 training examples");
  }
  val_probe_ = make_probe(val, derive_seed(config_.seed, kStreamValProbe));
  train_probe_ = make_probe(train, derive_seed(config_.seed, kStreamTrainProbe));
}

TaskContext::Probe TaskContext::make_probe(const LabeledSet& source, std::uint64_t seed) const {
  Probe probe;
  probe.set = source.subset(seeded_subsample(
      source.size(), static_cast<std::size_t>(config_.eval_subsample), seed));
  if (config_.task == Task::kMetricLearning) {
    probe.triplets = sample_triplets(probe.set, mix_seed(seed));
    if (probe.triplets.empty()) throw InputError("evaluation subsample yields no triplets");
    if (config_.metric == metrics::MetricKind::kVerification) {
      probe.pairs = sample_pairs(probe.set, config_.verification_pairs, mix_seed(seed + 1));
    }
    if (config_.metric == metrics::MetricKind::kRecallAtK &&
        config_.recall_k >= static_cast<int>(probe.set.size())) {
      throw UsageError("recall_k must be smaller than the evaluation subsample");
    }
  }
  return probe;
}

core::NetworkSpec TaskContext::network_spec() const {
  core::NetworkSpec spec;
  spec.sizes.push_back(static_cast<int>(train_.x.cols()));
  for (int h : config_.hidden) spec.sizes.push_back(h);
  if (config_.task == Task::kClassification) {
    spec.sizes.push_back(train_.num_classes);
    spec.head = core::Head::kSoftmax;
  } else {
    spec.sizes.push_back(config_.embedding_dim);
    spec.head = core::Head::kL2Normalize;
  }
  spec.hidden = core::Activation::kRelu;
  return spec;
}

int TaskContext::num_parameters() const {
  switch (config_.mode) {
    case losses::LossMode::kClassCorrelation:
      return train_.num_classes * (train_.num_classes - 1) / 2;
    case losses::LossMode::kDistanceMixture:
      return losses::kMixtureSize;
    case losses::LossMode::kFocalWeighting:
      return 2;
  }
  return 0;
}

int TaskContext::stats_per_param() const {
  return config_.mode == losses::LossMode::kClassCorrelation ? 2 : 1;
}

core::Var TaskContext::batch_loss(core::Graph& g, const core::Network& net,
                                  const core::BoundParams& bound,
                                  const losses::LossParameterization& phi, LossKind kind,
                                  Rng& rng) const {
  const auto n = train_.size();
  const int batch = config_.batch_size;

  if (config_.task == Task::kClassification) {
    std::vector<int> rows(static_cast<std::size_t>(batch));
    for (int& r : rows) r = static_cast<int>(uniform_index(rng, n));
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (int r : rows) labels.push_back(train_.y[static_cast<std::size_t>(r)]);
    core::Var probs = net.forward(g, bound, g.constant(gather(train_.x, rows)));
    if (kind == LossKind::kCrossEntropy) return losses::cross_entropy_loss(g, probs, labels);
    return losses::ala_classification_loss(g, probs, labels, phi.values());
  }

  if (kind == LossKind::kAdaptive && config_.mode == losses::LossMode::kFocalWeighting) {
    std::vector<int> rows(static_cast<std::size_t>(batch));
    for (int& r : rows) r = static_cast<int>(uniform_index(rng, n));
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (int r : rows) labels.push_back(train_.y[static_cast<std::size_t>(r)]);
    core::Var emb = net.forward(g, bound, g.constant(gather(train_.x, rows)));
    return losses::focal_weighting_loss(g, emb, labels, phi.parameter(0), phi.parameter(1),
                                        config_.alpha);
  }

  // Triplet batches: anchors, then positives, then negatives.
  const int count = std::max(1, batch / 2);
  std::vector<int> rows(static_cast<std::size_t>(3 * count));
  for (int t = 0; t < count; ++t) {
    int a = 0;
    const std::vector<int>* group = nullptr;
    do {
      a = static_cast<int>(uniform_index(rng, n));
      group = &train_classes_[static_cast<std::size_t>(train_.y[static_cast<std::size_t>(a)])];
    } while (group->size() < 2 || group->size() == n);
    int p = a;
    while (p == a) p = (*group)[uniform_index(rng, group->size())];
    int q = a;
    while (train_.y[static_cast<std::size_t>(q)] == train_.y[static_cast<std::size_t>(a)]) {
      q = static_cast<int>(uniform_index(rng, n));
    }
    rows[static_cast<std::size_t>(t)] = a;
    rows[static_cast<std::size_t>(count + t)] = p;
    rows[static_cast<std::size_t>(2 * count + t)] = q;
  }
  std::vector<losses::Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) triplets.push_back({t, count + t, 2 * count + t});
  core::Var emb = net.forward(g, bound, g.constant(gather(train_.x, rows)));
  const auto d = losses::triplet_distances(g, emb, triplets);
  switch (kind) {
    case LossKind::kTriplet:
      return losses::triplet_loss(g, d.d_plus, d.d_minus, config_.margin);
    case LossKind::kDefaultDistance:
      return losses::default_distance_loss(g, d.d_plus, d.d_minus);
    default: {
      const Matrix& v = phi.values();
      return losses::distance_mixture_loss(g, d.d_plus, d.d_minus,
                                           std::span<const double>(v.data(), v.size()));
    }
  }
}

Evaluation TaskContext::evaluate(const core::Network& net, const Probe& probe,
                                 bool with_stats) const {
  Evaluation ev;
  const Matrix out = net.predict(probe.set.x);
  const auto& y = probe.set.y;

  if (config_.task == Task::kClassification) {
    ev.loss = mean_cross_entropy(out, y);
    ev.metric = config_.metric == metrics::MetricKind::kError
                    ? metrics::classification_error(out, y)
                    : metrics::aucpr_from_probs(out, y);
    if (with_stats) {
      const losses::ConfusionMatrix cm = losses::confusion_matrix(out, y, probe.set.num_classes);
      ev.confusion = cm.values;
      const int k = probe.set.num_classes;
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          ev.stats.push_back({cm.values(i, j), cm.values(j, i)});
          ev.absent.push_back(cm.absent[static_cast<std::size_t>(i)] ||
                              cm.absent[static_cast<std::size_t>(j)]);
        }
      }
    }
    return ev;
  }

  if (config_.metric == metrics::MetricKind::kRecallAtK) {
    ev.metric = metrics::recall_at_k(out, y, config_.recall_k, {config_.threads});
  } else {
    std::vector<double> d(probe.pairs.same.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      d[k] = row_distance(out, probe.pairs.first[k], probe.pairs.second[k]);
    }
    ev.metric = metrics::verification_accuracy(d, probe.pairs.same);
  }

  std::vector<double> dp;
  std::vector<double> dm;
  dp.reserve(probe.triplets.size());
  dm.reserve(probe.triplets.size());
  double hinge = 0.0;
  for (const auto& t : probe.triplets) {
    dp.push_back(row_distance(out, t.anchor, t.positive));
    dm.push_back(row_distance(out, t.anchor, t.negative));
    hinge += losses::triplet_loss(dp.back(), dm.back(), config_.margin);
  }
  const double count = static_cast<double>(probe.triplets.size());
  ev.loss = hinge / count;

  if (with_stats) {
    if (config_.mode == losses::LossMode::kDistanceMixture) {
      for (int i = 0; i < losses::kMixtureSize; ++i) {
        const auto& ds = i < 5 ? dp : dm;
        double total = 0.0;
        for (double d : ds) total += losses::bank_function(i, d);
        ev.stats.push_back({total / count});
        ev.absent.push_back(0);
      }
    } else {
      ev.stats.push_back({std::accumulate(dp.begin(), dp.end(), 0.0) / count});
      ev.stats.push_back({std::accumulate(dm.begin(), dm.end(), 0.0) / count});
      ev.absent.assign(2, 0);
    }
  }
  return ev;
}

Evaluation TaskContext::evaluate_val(const core::Network& net) const {
  return evaluate(net, val_probe_, true);
}

Evaluation TaskContext::evaluate_train(const core::Network& net) const {
  return evaluate(net, train_probe_, false);
}

double TaskContext::reward_quantity(const core::Network& net) const {
  switch (config_.reward) {
    case metrics::RewardSource::kValMetric:
      return metrics::to_lower_better(config_.metric, evaluate(net, val_probe_, false).metric);
    case metrics::RewardSource::kValLoss:
      return evaluate(net, val_probe_, false).loss;
    case metrics::RewardSource::kTrainMetric:
      return metrics::to_lower_better(config_.metric, evaluate(net, train_probe_, false).metric);
    case metrics::RewardSource::kTrainLoss:
      return evaluate(net, train_probe_, false).loss;
  }
  throw UsageError("unknown reward source");
}

double TestProbe::measure(const core::Network& net) const {
  if (!measure_) return std::numeric_limits<double>::quiet_NaN();
  return measure_(net);
}

TestProbe make_test_probe(const TrainRunConfig& config, LabeledSet test) {
  test.check();
  return TestProbe([config, test = std::move(test)](const core::Network& net) {
    return evaluate_metric(config, net, test);
  });
}

}  // namespace ala::orchestrator
