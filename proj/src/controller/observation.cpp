#include "ala/controller/observation.hpp"

#include <algorithm>
#include <cmath>

namespace ala::controller {

std::vector<std::string> Ablation::names() const {
  std::vector<std::string> out;
  if (history) out.emplace_back("history");
  if (delta) out.emplace_back("delta");
  if (phi) out.emplace_back("phi");
  if (iteration) out.emplace_back("iter");
  return out;
}

void Ablation::enable(const std::string& name) {
  if (name == "history") {
    history = true;
  } else if (name == "delta") {
    delta = true;
  } else if (name == "phi") {
    phi = true;
  } else if (name == "iter" || name == "iteration") {
    iteration = true;
  } else {
    throw UsageError("unknown ablation '" + name + "' (history|delta|phi|iter)");
  }
}

ObservationLayout ObservationLayout::for_mode(losses::LossMode mode, int history,
                                              Ablation ablation) {
  if (history < 1) throw UsageError("history length must be >= 1");
  ObservationLayout layout;
  layout.mode = mode;
  layout.history = history;
  layout.stats_per_param = mode == losses::LossMode::kClassCorrelation ? 2 : 1;
  layout.ablation = ablation;
  return layout;
}

int ObservationLayout::size() const {
  int n = window_rows() * stats_per_param;
  if (!ablation.delta) n += stats_per_param;
  if (!ablation.phi) n += 1;
  if (!ablation.iteration) n += 1;
  return n;
}

nlohmann::json ObservationLayout::to_json() const {
  return {{"mode", losses::to_string(mode)},
          {"history", history},
          {"stats_per_param", stats_per_param},
          {"ablate", ablation.names()}};
}

ObservationLayout ObservationLayout::from_json(const nlohmann::json& j) {
  Ablation ablation;
  for (const auto& name : j.at("ablate")) ablation.enable(name.get<std::string>());
  ObservationLayout layout =
      for_mode(losses::loss_mode_from_string(j.at("mode").get<std::string>()),
               j.at("history").get<int>(), ablation);
  if (j.at("stats_per_param").get<int>() != layout.stats_per_param) {
    throw LoadError("observation layout: statistics width does not match mode");
  }
  return layout;
}

StatTracker::StatTracker(int history, int stats_per_param)
    : capacity_(history), width_(stats_per_param) {}

void StatTracker::push(const std::vector<double>& stats) {
  if (static_cast<int>(stats.size()) != width_) {
    throw ShapeError("stat tracker: expected " + std::to_string(width_) + " statistics");
  }
  if (mean_.empty()) {
    mean_ = stats;
  } else {
    for (std::size_t k = 0; k < stats.size(); ++k) {
      mean_[k] = kRunningMeanDecay * mean_[k] + (1.0 - kRunningMeanDecay) * stats[k];
    }
  }
  history_.push_back(stats);
  while (static_cast<int>(history_.size()) > capacity_) history_.pop_front();
}

std::vector<double> build_observation(const ObservationLayout& layout,
                                      const std::deque<std::vector<double>>& stat_history,
                                      const std::vector<double>& running_mean, double phi,
                                      long iteration, long total_iterations) {
  const int c = layout.stats_per_param;
  if (stat_history.empty()) throw UsageError("build_observation: empty statistics history");
  if (static_cast<int>(running_mean.size()) != c) {
    throw ShapeError("build_observation: running mean width mismatch");
  }
  if (total_iterations <= 0) throw UsageError("build_observation: total iterations must be > 0");

  auto normalize = [&](double v, int k) {
    const double m = std::max(std::abs(running_mean[static_cast<std::size_t>(k)]), kMeanFloor);
    const double x = v / m;
    if (!std::isfinite(x)) return x > 0 ? kStatClip : (x < 0 ? -kStatClip : 0.0);
    return std::clamp(x, -kStatClip, kStatClip);
  };

  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(layout.size()));
  const int rows = layout.window_rows();
  const int available = static_cast<int>(stat_history.size());
  for (int r = 0; r < rows; ++r) {
    // Row r of the window corresponds to history index available − rows + r.
    const int h = available - rows + r;
    for (int k = 0; k < c; ++k) {
      if (h < 0) {
        obs.push_back(0.0);
      } else {
        const auto& row = stat_history[static_cast<std::size_t>(h)];
        if (static_cast<int>(row.size()) != c) throw ShapeError("statistics row width mismatch");
        obs.push_back(normalize(row[static_cast<std::size_t>(k)], k));
      }
    }
  }
  if (!layout.ablation.delta) {
    const auto& newest = stat_history.back();
    for (int k = 0; k < c; ++k) {
      const double m = running_mean[static_cast<std::size_t>(k)];
      obs.push_back(normalize(newest[static_cast<std::size_t>(k)] - m, k));
    }
  }
  if (!layout.ablation.phi) obs.push_back(phi);
  if (!layout.ablation.iteration) {
    obs.push_back(std::clamp(static_cast<double>(iteration) / static_cast<double>(total_iterations),
                             0.0, 1.0));
  }
  return obs;
}

}  // namespace ala::controller
