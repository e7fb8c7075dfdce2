#pragma once

#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "ala/losses/loss_param.hpp"

namespace ala::controller {

inline constexpr double kStatClip = 5.0;
inline constexpr double kMeanFloor = 1e-8;
inline constexpr double kRunningMeanDecay = 0.9;

/// State components that can be removed for ablations.
struct Ablation {
  bool history = false;    // keep only the newest statistics row
  bool delta = false;
  bool phi = false;
  bool iteration = false;

  bool operator==(const Ablation&) const = default;
  std::vector<std::string> names() const;
  void enable(const std::string& name);  // UsageError on unknown names
};

/// Shape of a flattened observation for one loss parameter:
///   [H×c statistics window (oldest row first) | c deltas | φ | t/T]
/// with components dropped according to the ablation.
struct ObservationLayout {
  losses::LossMode mode = losses::LossMode::kClassCorrelation;
  int history = 10;
  int stats_per_param = 2;
  Ablation ablation;

  static ObservationLayout for_mode(losses::LossMode mode, int history, Ablation ablation = {});

  int window_rows() const { return ablation.history ? 1 : history; }
  int size() const;

  bool operator==(const ObservationLayout&) const = default;
  nlohmann::json to_json() const;
  static ObservationLayout from_json(const nlohmann::json& j);
};

/// Per-parameter statistics stream: the last H raw rows and an EMA
/// (decay 0.9) of the rows, seeded with the first row.
class StatTracker {
 public:
  StatTracker() = default;
  StatTracker(int history, int stats_per_param);

  /// Appends a row and updates the running mean.
  void push(const std::vector<double>& stats);

  const std::deque<std::vector<double>>& history() const { return history_; }
  const std::vector<double>& running_mean() const { return mean_; }
  bool empty() const { return history_.empty(); }

 private:
  int capacity_ = 0;
  int width_ = 0;
  std::deque<std::vector<double>> history_;
  std::vector<double> mean_;
};

/// Flattens one observation.
///   window:  each row divided by the running mean (floored at 1e-8) and
///            clipped to [−5, 5]; missing rows before the oldest are zeros.
///   delta:   (newest − mean) / mean, clipped to [−5, 5].
///   φ, iteration / total_iterations.
/// `stat_history` must hold at least one row (newest last).
std::vector<double> build_observation(const ObservationLayout& layout,
                                      const std::deque<std::vector<double>>& stat_history,
                                      const std::vector<double>& running_mean, double phi,
                                      long iteration, long total_iterations);

}  // namespace ala::controller
