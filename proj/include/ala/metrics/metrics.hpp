#pragma once

#include <span>
#include <string>
#include <vector>

#include "ala/core/types.hpp"
#include "ala/kernels/kernels.hpp"

namespace ala::metrics {

enum class MetricKind { kError, kAucpr, kRecallAtK, kVerification };

/// Where the reward signal is measured.
enum class RewardSource { kValMetric, kValLoss, kTrainMetric, kTrainLoss };

std::string to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);
std::string to_string(RewardSource s);
RewardSource reward_source_from_string(const std::string& s);

/// True for metrics where larger values are better (everything but error).
bool higher_is_better(MetricKind k);
/// Maps a metric value to lower-is-better form in [0, 1].
double to_lower_better(MetricKind k, double value);

/// Fraction of rows whose argmax (ties → lowest index) differs from the
/// label. UsageError on empty input.
double classification_error(const Matrix& probs, const std::vector<int>& labels);

/// Average precision: items ranked by descending score (ties keep input
/// order), AP = Σ_k (R_k − R_{k−1})·P_k. UsageError if there is no positive
/// label or the inputs are empty.
double aucpr(std::span<const double> scores, std::span<const int> labels);

/// Binary problems score the positive class (column 1); multiclass problems
/// macro-average one-vs-rest AP over classes that have positives.
double aucpr_from_probs(const Matrix& probs, const std::vector<int>& labels);

/// Fraction of queries whose k nearest neighbours (Euclidean, self excluded,
/// ties by index) contain a same-label item. UsageError if k < 1 or k ≥ n.
double recall_at_k(const Matrix& embeddings, const std::vector<int>& labels, int k,
                   kernels::Exec exec = {});

/// Best accuracy over thresholds τ ∈ {−∞, midpoints of sorted distances, +∞}
/// when predicting "same" iff distance < τ. UsageError on empty input.
double verification_accuracy(std::span<const double> distances, std::span<const char> same);

/// Σ_m γ^{N−m} · values[m] for m = 1..N (0⁰ = 1). UsageError when empty.
double discounted_metric(std::span<const double> values, double gamma);

/// sign(previous − current) ∈ {−1, 0, +1}.
int reward(double previous, double current);

}  // namespace ala::metrics
