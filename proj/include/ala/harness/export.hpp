#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "ala/orchestrator/report.hpp"

namespace ala::harness {

using orchestrator::RunReport;
using orchestrator::StepRecord;

/// Files written by export_curves under one directory:
///   curves.csv    step,seed,child,train_loss,val_loss,val_metric,test_metric,
///                 reward,discounted; one row per record
///   summary.csv   per step, mean and std across reports of each report's
///                 child-averaged value
///   phi/phi_seed{S}_child{C}.csv  step,parameter_id,value
/// Doubles use shortest round-trip text, so reading back is exact.
struct CurveFiles {
  std::filesystem::path detail;
  std::filesystem::path summary;
  std::vector<std::filesystem::path> phi;
};

/// IoError when the directory or a file cannot be written; UsageError on an
/// empty report list or two reports with the same seed.
CurveFiles export_curves(const std::vector<RunReport>& reports, const std::filesystem::path& dir);

void write_detail_csv(const std::vector<RunReport>& reports, const std::filesystem::path& path);
void write_summary_csv(const std::vector<RunReport>& reports, const std::filesystem::path& path);
std::vector<std::filesystem::path> write_phi_csv(const RunReport& report,
                                                 const std::filesystem::path& dir);

/// Records of curves.csv grouped by seed, in file order, with phi taken from
/// the matching phi files when present. IoError on malformed input.
std::map<std::uint64_t, std::vector<StepRecord>> read_curves(const std::filesystem::path& dir);

/// Row count of a CSV file excluding the header.
long csv_row_count(const std::filesystem::path& path);

}  // namespace ala::harness
