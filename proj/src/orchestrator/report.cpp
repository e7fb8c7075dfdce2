#include "ala/orchestrator/report.hpp"

#include <cmath>
#include <numeric>

namespace ala::orchestrator {

long RunReport::last_step() const {
  long last = 0;
  for (const auto& r : records) last = std::max(last, r.step);
  return last;
}

std::vector<double> RunReport::final_test_metrics() const {
  const long last = last_step();
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.step == last) out.push_back(r.test_metric);
  }
  return out;
}

double RunReport::final_test_mean() const {
  const auto v = final_test_metrics();
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double RunReport::final_test_std() const {
  const auto v = final_test_metrics();
  if (v.size() < 2) return 0.0;
  const double m = final_test_mean();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

nlohmann::json RunReport::summary_json() const {
  return {{"kind", kind},
          {"config", config.to_json()},
          {"steps", last_step()},
          {"final_test_metric", final_test_metrics()},
          {"final_test_mean", final_test_mean()},
          {"final_test_std", final_test_std()},
          {"episodes_per_step", episodes_per_step},
          {"skipped_per_step", skipped_per_step},
          {"expected_episodes_per_step", expected_episodes_per_step},
          {"policy_updates", policy_updates},
          {"invariant_checks", invariant_checks},
          {"invariant_failures", invariant_failures},
          {"events", events}};
}

}  // namespace ala::orchestrator
