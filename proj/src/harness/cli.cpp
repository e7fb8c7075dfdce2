#include "ala/harness/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ala/controller/policy.hpp"
#include "ala/core/checkpoint.hpp"
#include "ala/harness/export.hpp"
#include "ala/harness/surface.hpp"
#include "ala/orchestrator/trainer.hpp"

namespace ala::harness {

namespace fs = std::filesystem;
using orchestrator::Driver;
using orchestrator::RunReport;
using orchestrator::Task;
using orchestrator::TrainRunConfig;

Experiment Experiment::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  nlohmann::json run = j;
  nlohmann::json data = nlohmann::json::object();
  if (run.contains("data")) {
    data = run["data"];
    run.erase("data");
  }
  if (!data.is_object()) throw UsageError("config: \"data\" must be an object");
  Experiment e;
  e.run = TrainRunConfig::from_json(run);
  if (!data.contains("kind")) {
    if (e.run.task == Task::kMetricLearning) {
      data["kind"] = "embedding-clusters";
    } else if (e.run.metric == metrics::MetricKind::kAucpr) {
      data["kind"] = "imbalanced-binary";
      if (!data.contains("num_classes")) data["num_classes"] = 2;
    }
  }
  e.data = DatasetSpec::from_json(data);
  return e;
}

nlohmann::json Experiment::to_json() const {
  nlohmann::json j = run.to_json();
  j["data"] = data.to_json();
  return j;
}

Experiment load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return Experiment::from_json(j);
}

void write_run(const RunReport& report, const DatasetSpec& data, const fs::path& dir) {
  export_curves({report}, dir);
  nlohmann::json summary = report.summary_json();
  summary["data"] = data.to_json();
  {
    const fs::path path = dir / "summary.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << summary.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
  }
  for (std::size_t c = 0; c < report.final_models.size(); ++c) {
    core::save_checkpoint(dir / ("model_child" + std::to_string(c) + ".ckpt"),
                          core::network_checkpoint(report.final_models[c]));
  }
  if (report.policy) controller::save_policy(dir / "policy.ckpt", *report.policy);
}

namespace {

// Flags shared by the run subcommands. Options only override the config
// when given.
struct RunFlags {
  std::string config;
  std::uint64_t seed = 0;
  int children = 0;
  int steps = 0;
  std::string reward;
  std::string metric;
  int episode_len = 0;
  int history = 0;
  int controller_depth = 0;
  std::vector<std::string> ablate;
  bool no_replay = false;
  int threads = 0;
  std::string out;

  std::vector<CLI::Option*> options;

  void attach(CLI::App* app) {
    options = {
        app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile),
        app->add_option("--seed", seed, "master seed"),
        app->add_option("--children", children, "child models")->check(CLI::PositiveNumber),
        app->add_option("--steps", steps, "controller time steps")->check(CLI::NonNegativeNumber),
        app->add_option("--reward", reward, "reward source")
            ->check(CLI::IsMember({"val-metric", "val-loss", "train-metric", "train-loss"})),
        app->add_option("--metric", metric, "evaluation metric")
            ->check(CLI::IsMember({"error", "aucpr", "recall@k", "verification"})),
        app->add_option("--episode-len", episode_len, "episode length T")
            ->check(CLI::PositiveNumber),
        app->add_option("--history", history, "statistics history H")->check(CLI::PositiveNumber),
        app->add_option("--controller-depth", controller_depth, "policy hidden layers")
            ->check(CLI::Range(1, 3)),
        app->add_option("--ablate", ablate, "drop a state component (repeatable)")
            ->check(CLI::IsMember({"history", "delta", "phi", "iter"})),
        app->add_flag("--no-replay", no_replay, "disable replay memory"),
        app->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber),
        app->add_option("--out", out, "output directory"),
    };
  }

  bool given(const char* name) const {
    for (const auto* o : options) {
      if (o->check_lname(std::string(name).substr(2)) && o->count() > 0) return true;
    }
    return false;
  }

  Experiment experiment() const {
    Experiment e = config.empty() ? Experiment::from_json(nlohmann::json::object())
                                  : load_experiment(config);
    TrainRunConfig& c = e.run;
    if (given("--seed")) c.seed = seed;
    if (given("--children")) c.children = children;
    if (given("--steps")) c.steps = steps;
    if (given("--reward")) c.reward = metrics::reward_source_from_string(reward);
    if (given("--metric")) c.metric = metrics::metric_kind_from_string(metric);
    if (given("--episode-len")) c.episode_length = episode_len;
    if (given("--history")) c.history = history;
    if (given("--controller-depth")) c.controller_depth = controller_depth;
    for (const auto& a : ablate) c.ablation.enable(a);
    if (no_replay) c.replay = false;
    if (given("--threads")) c.threads = threads;
    c.validate();
    return e;
  }
};

void write_split_csv(const LabeledSet& set, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "label";
  for (Eigen::Index k = 0; k < set.x.cols(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t r = 0; r < set.size(); ++r) {
    out << set.y[r];
    for (Eigen::Index k = 0; k < set.x.cols(); ++k) {
      out << ',' << set.x(static_cast<Eigen::Index>(r), k);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void prepare_out(const std::string& out) {
  if (out.empty()) return;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());
}

void print_summary(std::ostream& out, const RunReport& report) {
  out << report.kind << ": steps " << report.last_step() << ", final test metric "
      << report.final_test_mean() << " ± " << report.final_test_std() << " over "
      << report.final_test_metrics().size() << " children, invariant failures "
      << report.invariant_failures.size() << '\n';
}

int run_command(const std::string& name, const RunFlags& flags, const std::string& mode,
                const std::string& policy_path, bool finetune, std::ostream& out) {
  const Experiment e = flags.experiment();
  const DatasetSplits data = generate_dataset(e.data);
  const auto probe = orchestrator::make_test_probe(e.run, data.test);

  // Load the policy before any output is created so a bad checkpoint leaves
  // nothing behind.
  std::optional<controller::PolicyNetwork> policy;
  if (name == "transfer") policy = controller::load_policy(policy_path, e.run.layout());
  prepare_out(flags.out);

  RunReport report;
  if (name == "train") {
    report = orchestrator::run_training(e.run, data.train, data.val, probe);
  } else if (name == "baseline") {
    report = orchestrator::run_baseline(e.run, orchestrator::baseline_from_string(mode),
                                        data.train, data.val, probe);
  } else {
    report = orchestrator::run_transfer(e.run, std::move(*policy), finetune, data.train,
                                        data.val, probe);
  }
  if (!flags.out.empty()) write_run(report, e.data, flags.out);
  print_summary(out, report);
  return report.invariant_failures.empty() ? 0 : 1;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive loss alignment: training, baselines and analysis", "ala"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "ALA run with a fresh policy");
  train_flags.attach(train);

  RunFlags baseline_flags;
  std::string mode;
  auto* baseline = app.add_subcommand("baseline", "run a baseline");
  baseline_flags.attach(baseline);
  baseline->add_option("--mode", mode, "baseline kind")
      ->required()
      ->check(CLI::IsMember({"fixed", "random-phi", "confusion-phi", "bandit"}));

  RunFlags transfer_flags;
  std::string policy_path;
  bool finetune = false;
  auto* transfer = app.add_subcommand("transfer", "run with a saved policy");
  transfer_flags.attach(transfer);
  transfer->add_option("--policy", policy_path, "policy checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  transfer->add_flag("--finetune", finetune, "keep updating the policy");

  std::string surface_config;
  std::string checkpoint;
  std::uint64_t surface_seed = 0;
  int resolution = 21;
  double span = 1.0;
  std::string surface_out;
  auto* surface = app.add_subcommand("analyze-surface", "loss-surface curvature of a model");
  surface->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  surface->add_option("--config", surface_config, "JSON config file")->check(CLI::ExistingFile);
  surface->add_option("--seed", surface_seed, "direction seed");
  surface->add_option("--resolution", resolution, "grid points per axis");
  surface->add_option("--span", span, "grid half-width");
  surface->add_option("--out", surface_out, "write the grid as CSV here");

  std::vector<std::string> run_dirs;
  std::string export_out;
  auto* exporter = app.add_subcommand("export-curves", "merge run directories into one curve set");
  exporter->add_option("runs", run_dirs, "run directories")->required()->check(CLI::ExistingDirectory);
  exporter->add_option("--out", export_out, "output directory")->required();

  std::string data_config;
  std::string data_out;
  std::uint64_t data_seed = 0;
  auto* gen = app.add_subcommand("gen-data", "write the dataset splits as CSV");
  gen->add_option("--config", data_config, "JSON config file")->check(CLI::ExistingFile);
  gen->add_option("--seed", data_seed, "dataset seed");
  gen->add_option("--out", data_out, "output directory")->required();

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.emplace_back("ala");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ala: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train) return run_command("train", train_flags, "", "", false, out);
    if (*baseline) return run_command("baseline", baseline_flags, mode, "", false, out);
    if (*transfer) return run_command("transfer", transfer_flags, "", policy_path, finetune, out);

    if (*surface) {
      const Experiment e = surface_config.empty()
                               ? Experiment::from_json(nlohmann::json::object())
                               : load_experiment(surface_config);
      const core::Network net = core::network_from_checkpoint(core::load_checkpoint(checkpoint));
      const DatasetSplits data = generate_dataset(e.data);
      SurfaceConfig sc;
      sc.resolution = resolution;
      sc.span = span;
      const auto loss = [&](const core::Network& n) {
        return orchestrator::reference_loss(e.run, n, data.train);
      };
      const SurfaceGrid grid = loss_surface_curvature(net, loss, sc, surface_seed);
      if (!surface_out.empty()) {
        prepare_out(surface_out);
        const fs::path path = fs::path(surface_out) / "surface.csv";
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot write " + path.string());
        f.precision(17);
        f << "x,y,loss\n";
        for (std::size_t i = 0; i < grid.xs.size(); ++i) {
          for (std::size_t j = 0; j < grid.ys.size(); ++j) {
            f << grid.xs[i] << ',' << grid.ys[j] << ','
              << grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
          }
        }
        if (!f) throw IoError("write failed: " + path.string());
      }
      out << nlohmann::json{{"mean_curvature", grid.mean_curvature},
                            {"resolution", resolution},
                            {"span", span},
                            {"center_loss", grid.values(resolution / 2, resolution / 2)}}
                 .dump()
          << '\n';
      return 0;
    }

    if (*exporter) {
      std::vector<RunReport> reports;
      for (const auto& dir : run_dirs) {
        for (auto& [seed, records] : read_curves(dir)) {
          RunReport r;
          r.config.seed = seed;
          r.records = std::move(records);
          reports.push_back(std::move(r));
        }
      }
      const CurveFiles files = export_curves(reports, export_out);
      out << "wrote " << files.detail.string() << ", " << files.summary.string() << " and "
          << files.phi.size() << " phi files\n";
      return 0;
    }

    if (*gen) {
      Experiment e = data_config.empty() ? Experiment::from_json(nlohmann::json::object())
                                         : load_experiment(data_config);
      if (gen->get_option("--seed")->count() > 0) e.data.seed = data_seed;
      const DatasetSplits data = generate_dataset(e.data);
      prepare_out(data_out);
      write_split_csv(data.train, fs::path(data_out) / "train.csv");
      write_split_csv(data.val, fs::path(data_out) / "val.csv");
      write_split_csv(data.test, fs::path(data_out) / "test.csv");
      out << "wrote " << data.train.size() << "/" << data.val.size() << "/" << data.test.size()
          << " examples to " << data_out << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    err << "ala: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "ala: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_main(int argc, char** argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace ala::harness
