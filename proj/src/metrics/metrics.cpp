#include "ala/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ala::metrics {

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::kError: return "error";
    case MetricKind::kAucpr: return "aucpr";
    case MetricKind::kRecallAtK: return "recall@k";
    case MetricKind::kVerification: return "verification";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "error") return MetricKind::kError;
  if (s == "aucpr") return MetricKind::kAucpr;
  if (s == "recall@k" || s == "recall") return MetricKind::kRecallAtK;
  if (s == "verification") return MetricKind::kVerification;
  throw UsageError("unknown metric '" + s + "'");
}

std::string to_string(RewardSource s) {
  switch (s) {
    case RewardSource::kValMetric: return "val-metric";
    case RewardSource::kValLoss: return "val-loss";
    case RewardSource::kTrainMetric: return "train-metric";
    case RewardSource::kTrainLoss: return "train-loss";
  }
  return "?";
}

RewardSource reward_source_from_string(const std::string& s) {
  if (s == "val-metric") return RewardSource::kValMetric;
  if (s == "val-loss") return RewardSource::kValLoss;
  if (s == "train-metric") return RewardSource::kTrainMetric;
  if (s == "train-loss") return RewardSource::kTrainLoss;
  throw UsageError("unknown reward source '" + s + "'");
}

bool higher_is_better(MetricKind k) { return k != MetricKind::kError; }

double to_lower_better(MetricKind k, double value) {
  return higher_is_better(k) ? 1.0 - value : value;
}

double classification_error(const Matrix& probs, const std::vector<int>& labels) {
  if (labels.empty()) throw UsageError("classification_error: empty input");
  if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("classification_error: label count mismatch");
  }
  std::size_t wrong = 0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    if (best != labels[static_cast<std::size_t>(r)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double aucpr(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw UsageError("aucpr: empty input");
  if (scores.size() != labels.size()) throw ShapeError("aucpr: length mismatch");
  std::size_t positives = 0;
  for (int y : labels) positives += y != 0 ? 1 : 0;
  if (positives == 0) throw UsageError("aucpr: undefined without positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Recall rises by 1/P exactly at positive ranks, so AP reduces to the mean
  // precision over those ranks.
  double sum = 0.0;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 0) continue;
    ++tp;
    sum += static_cast<double>(tp) / static_cast<double>(rank + 1);
  }
  return sum / static_cast<double>(positives);
}

double aucpr_from_probs(const Matrix& probs, const std::vector<int>& labels) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("aucpr_from_probs: label count mismatch");
  }
  const auto classes = probs.cols();
  std::vector<double> scores(labels.size());
  std::vector<int> binary(labels.size());
  auto one_vs_rest = [&](Eigen::Index c) {
    for (std::size_t n = 0; n < labels.size(); ++n) {
      scores[n] = probs(static_cast<Eigen::Index>(n), c);
      binary[n] = labels[n] == c ? 1 : 0;
    }
    return aucpr(scores, binary);
  };
  if (classes == 2) return one_vs_rest(1);
  double total = 0.0;
  int counted = 0;
  for (Eigen::Index c = 0; c < classes; ++c) {
    if (std::find(labels.begin(), labels.end(), static_cast<int>(c)) == labels.end()) continue;
    total += one_vs_rest(c);
    ++counted;
  }
  if (counted == 0) throw UsageError("aucpr_from_probs: no labels");
  return total / counted;
}

double recall_at_k(const Matrix& embeddings, const std::vector<int>& labels, int k,
                   kernels::Exec exec) {
  const auto n = embeddings.rows();
  if (n != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("recall_at_k: label count mismatch");
  }
  if (k < 1 || k >= n) {
    throw UsageError("recall_at_k: need 1 <= k < n (k=" + std::to_string(k) +
                     ", n=" + std::to_string(n) + ")");
  }
  const Matrix d = kernels::pairwise_sq_distances(embeddings, exec);
  const std::vector<char> hits = kernels::knn_label_hits(d, labels, k, exec);
  const auto found = std::count(hits.begin(), hits.end(), char{1});
  return static_cast<double>(found) / static_cast<double>(n);
}

double verification_accuracy(std::span<const double> distances, std::span<const char> same) {
  if (distances.empty()) throw UsageError("verification_accuracy: empty input");
  if (distances.size() != same.size()) throw ShapeError("verification_accuracy: length mismatch");
  const std::size_t m = distances.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });

  // τ = −∞: everything predicted "different".
  std::size_t same_total = 0;
  for (char s : same) same_total += s != 0 ? 1 : 0;
  std::size_t correct = m - same_total;
  std::size_t best = correct;
  // Sweep τ upward past each group of equal distances; a midpoint between
  // two distinct sorted values admits exactly the items below it.
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j < m && distances[order[j]] == distances[order[i]]) {
      correct += same[order[j]] != 0 ? 1 : 0;
      correct -= same[order[j]] != 0 ? 0 : 1;
      ++j;
    }
    best = std::max(best, correct);
    i = j;
  }
  return static_cast<double>(best) / static_cast<double>(m);
}

double discounted_metric(std::span<const double> values, double gamma) {
  if (values.empty()) throw UsageError("discounted_metric: empty series");
  const std::size_t n = values.size();
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    total += std::pow(gamma, static_cast<double>(n - 1 - m)) * values[m];
  }
  return total;
}

int reward(double previous, double current) {
  if (previous > current) return 1;
  if (previous < current) return -1;
  return 0;
}

}  // namespace ala::metrics
