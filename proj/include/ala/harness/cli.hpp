#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ala/harness/dataset.hpp"
#include "ala/orchestrator/config.hpp"
#include "ala/orchestrator/report.hpp"

namespace ala::harness {

/// A config file: run settings at the top level plus an optional "data"
/// object holding a DatasetSpec. When "data" has no "kind" it follows the
/// task: embedding-clusters for metric learning, imbalanced-binary for
/// AUCPR classification, confusable-gaussians otherwise.
struct Experiment {
  orchestrator::TrainRunConfig run;
  DatasetSpec data;

  static Experiment from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Experiment load_experiment(const std::filesystem::path& path);

/// Writes one run's outputs into `dir`: summary.json, curves.csv,
/// summary.csv, phi/, model_child{C}.ckpt and policy.ckpt when the run
/// has a policy.
void write_run(const orchestrator::RunReport& report, const DatasetSpec& data,
               const std::filesystem::path& dir);

/// Entry point of the `ala` tool; `args` is argv-style, program name first.
/// Returns 0 on success, 2 on usage errors
/// (bad flags, invalid config), 1 on any other failure; diagnostics go to
/// `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace ala::harness
