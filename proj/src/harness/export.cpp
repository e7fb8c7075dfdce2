#include "ala/harness/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>

namespace ala::harness {

namespace fs = std::filesystem;

namespace {

const char* kDetailHeader =
    "step,seed,child,train_loss,val_loss,val_metric,test_metric,reward,discounted";

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse(const std::string& s, const fs::path& path) {
  T v{};
  if (std::is_floating_point_v<T> && s == "nan") return static_cast<T>(std::nan(""));
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("malformed value '" + s + "' in " + path.string());
  }
  return v;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path, const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw IoError("unexpected header in " + path.string());
  }
  const std::size_t width = split(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != width) throw IoError("wrong field count in " + path.string());
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string phi_name(std::uint64_t seed, int child) {
  return "phi_seed" + std::to_string(seed) + "_child" + std::to_string(child) + ".csv";
}

void check_reports(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw UsageError("export_curves: no reports");
  std::set<std::uint64_t> seeds;
  for (const auto& r : reports) {
    if (!seeds.insert(r.config.seed).second) {
      throw UsageError("export_curves: duplicate seed " + std::to_string(r.config.seed));
    }
  }
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return m;
}

}  // namespace

void write_detail_csv(const std::vector<RunReport>& reports, const fs::path& path) {
  check_reports(reports);
  auto out = open_out(path);
  out << kDetailHeader << '\n';
  for (const auto& rep : reports) {
    for (const auto& r : rep.records) {
      out << r.step << ',' << rep.config.seed << ',' << r.child << ',' << num(r.train_loss) << ','
          << num(r.val_loss) << ',' << num(r.val_metric) << ',' << num(r.test_metric) << ','
          << r.reward << ',' << num(r.discounted) << '\n';
    }
  }
  close_out(out, path);
}

void write_summary_csv(const std::vector<RunReport>& reports, const fs::path& path) {
  check_reports(reports);
  constexpr int kColumns = 5;
  const char* names[kColumns] = {"train_loss", "val_loss", "val_metric", "test_metric", "reward"};
  std::set<long> steps;
  for (const auto& rep : reports) {
    for (const auto& r : rep.records) steps.insert(r.step);
  }

  auto out = open_out(path);
  out << "step,runs";
  for (const char* n : names) out << ',' << n << "_mean," << n << "_std";
  out << '\n';
  for (long step : steps) {
    std::vector<double> per_run[kColumns];
    for (const auto& rep : reports) {
      double sums[kColumns] = {};
      int count = 0;
      for (const auto& r : rep.records) {
        if (r.step != step) continue;
        sums[0] += r.train_loss;
        sums[1] += r.val_loss;
        sums[2] += r.val_metric;
        sums[3] += r.test_metric;
        sums[4] += r.reward;
        ++count;
      }
      if (count == 0) continue;
      for (int c = 0; c < kColumns; ++c) per_run[c].push_back(sums[c] / count);
    }
    out << step << ',' << per_run[0].size();
    for (const auto& col : per_run) {
      const Moments m = moments(col);
      out << ',' << num(m.mean) << ',' << num(m.std);
    }
    out << '\n';
  }
  close_out(out, path);
}

std::vector<fs::path> write_phi_csv(const RunReport& report, const fs::path& dir) {
  std::set<int> children;
  for (const auto& r : report.records) children.insert(r.child);
  std::vector<fs::path> paths;
  for (int child : children) {
    const fs::path path = dir / phi_name(report.config.seed, child);
    auto out = open_out(path);
    out << "step,parameter_id,value\n";
    for (const auto& r : report.records) {
      if (r.child != child) continue;
      for (std::size_t id = 0; id < r.phi.size(); ++id) {
        out << r.step << ',' << id << ',' << num(r.phi[id]) << '\n';
      }
    }
    close_out(out, path);
    paths.push_back(path);
  }
  return paths;
}

CurveFiles export_curves(const std::vector<RunReport>& reports, const fs::path& dir) {
  check_reports(reports);
  std::error_code ec;
  fs::create_directories(dir / "phi", ec);
  if (ec) throw IoError("cannot create " + (dir / "phi").string() + ": " + ec.message());
  CurveFiles files;
  files.detail = dir / "curves.csv";
  files.summary = dir / "summary.csv";
  write_detail_csv(reports, files.detail);
  write_summary_csv(reports, files.summary);
  for (const auto& rep : reports) {
    auto p = write_phi_csv(rep, dir / "phi");
    files.phi.insert(files.phi.end(), p.begin(), p.end());
  }
  return files;
}

std::map<std::uint64_t, std::vector<StepRecord>> read_curves(const fs::path& dir) {
  const fs::path detail = dir / "curves.csv";
  std::map<std::uint64_t, std::vector<StepRecord>> out;
  for (const auto& f : read_rows(detail, kDetailHeader)) {
    StepRecord r;
    r.step = parse<long>(f[0], detail);
    const auto seed = parse<std::uint64_t>(f[1], detail);
    r.child = parse<int>(f[2], detail);
    r.train_loss = parse<double>(f[3], detail);
    r.val_loss = parse<double>(f[4], detail);
    r.val_metric = parse<double>(f[5], detail);
    r.test_metric = parse<double>(f[6], detail);
    r.reward = parse<int>(f[7], detail);
    r.discounted = parse<double>(f[8], detail);
    out[seed].push_back(std::move(r));
  }

  for (auto& [seed, records] : out) {
    std::set<int> children;
    for (const auto& r : records) children.insert(r.child);
    for (int child : children) {
      const fs::path path = dir / "phi" / phi_name(seed, child);
      if (!fs::exists(path)) continue;
      std::map<long, std::vector<double>> by_step;
      for (const auto& f : read_rows(path, "step,parameter_id,value")) {
        auto& values = by_step[parse<long>(f[0], path)];
        if (parse<std::size_t>(f[1], path) != values.size()) {
          throw IoError("parameter ids out of order in " + path.string());
        }
        values.push_back(parse<double>(f[2], path));
      }
      for (auto& r : records) {
        if (r.child != child) continue;
        auto it = by_step.find(r.step);
        if (it != by_step.end()) r.phi = it->second;
      }
    }
  }
  return out;
}

long csv_row_count(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  long rows = -1;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  return rows < 0 ? 0 : rows;
}

}  // namespace ala::harness
