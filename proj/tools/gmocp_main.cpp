// Experiment driver: generate synthetic model-probability streams, run the
// online conformal methods over seed lists, and aggregate results tables.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmocp/cli_config.hpp"
#include "gmocp/engine.hpp"
#include "gmocp/results.hpp"
#include "gmocp/stream.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct GenerateArgs {
  std::string out;
  gmocp::GeneratorConfig config;
  std::string drift = "gradual";
  std::vector<double> qualities;
};

struct RunArgs {
  std::string stream_path;
  std::string config_path;
  std::string out = "results.csv";
  std::string per_step_dir;
  std::string method;
  std::string seeds;
  int jobs = 1;
  // flag-provided overrides; CLI11 counts tell us which were set
  gmocp::RunOptions options;
};

struct SweepArgs {
  RunArgs run;
  std::vector<int> n_grid{1, 3, 5};
  std::vector<int> j_grid{1, 2, 4};
};

struct ReportArgs {
  std::string results_path;
  std::string per_step_path;
  std::string rolling_out;
  int window = 200;
};

// Runs the configured method for each seed; seed order in the output is
// independent of the scheduling.
std::vector<gmocp::RunReport> run_seeds(const gmocp::Stream& stream,
                                        const gmocp::RunConfig& base,
                                        const std::vector<std::uint64_t>& seeds, int jobs) {
  std::vector<gmocp::RunReport> reports(seeds.size());
  if (jobs < 1) jobs = 1;
  std::size_t next = 0;
  while (next < seeds.size()) {
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                    seeds.size() - next);
    std::vector<std::future<gmocp::RunReport>> futures;
    futures.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      gmocp::RunConfig cfg = base;
      cfg.seed = seeds[next + i];
      futures.push_back(std::async(std::launch::async,
                                   [&stream, cfg]() { return gmocp::run(stream, cfg); }));
    }
    for (std::size_t i = 0; i < batch; ++i) reports[next + i] = futures[i].get();
    next += batch;
  }
  return reports;
}

void dump_per_step(const std::string& dir, const std::vector<gmocp::RunReport>& reports) {
  std::filesystem::create_directories(dir);
  for (const gmocp::RunReport& report : reports) {
    const std::string name = "steps_" + gmocp::method_name(report.config.method) + "_N" +
                             std::to_string(report.config.n_trials) + "_J" +
                             std::to_string(report.config.n_selective) + "_seed" +
                             std::to_string(report.config.seed) + ".csv";
    gmocp::write_per_step_log((std::filesystem::path(dir) / name).string(), report);
  }
}

int cmd_generate(const GenerateArgs& args) {
  gmocp::GeneratorConfig config = args.config;
  config.drift.kind = args.drift == "abrupt" ? gmocp::DriftKind::abrupt
                                             : gmocp::DriftKind::gradual;
  config.drift.base_quality = args.qualities;
  const gmocp::Stream stream = gmocp::generate_stream(config);
  gmocp::write_stream(stream, args.out);
  std::printf("wrote %s: M=%d K=%d T=%lld drift=%s seed=%llu\n", args.out.c_str(),
              stream.header.n_models, stream.header.n_labels,
              static_cast<long long>(stream.header.length), args.drift.c_str(),
              static_cast<unsigned long long>(config.seed));
  return 0;
}

int cmd_run(const RunArgs& args) {
  const gmocp::Stream stream = gmocp::load_stream(args.stream_path);
  const std::string stream_hash = gmocp::hash_file(args.stream_path);

  const auto reports = run_seeds(stream, args.options.config, args.options.seeds, args.jobs);
  std::vector<gmocp::ResultRow> rows;
  rows.reserve(reports.size());
  for (const gmocp::RunReport& report : reports) {
    rows.push_back(gmocp::make_result_row(report, stream_hash));
  }
  gmocp::append_results(args.out, rows);
  if (!args.per_step_dir.empty()) dump_per_step(args.per_step_dir, reports);

  for (const gmocp::ResultRow& row : rows) {
    std::printf("%s N=%d J=%d seed=%llu coverage=%.4f avg_width=%.3f updates=%lld\n",
                row.method.c_str(), row.n_trials, row.n_selective,
                static_cast<unsigned long long>(row.seed), row.coverage, row.avg_width,
                static_cast<long long>(row.updates_total));
  }
  return 0;
}

int cmd_sweep(const SweepArgs& args) {
  const gmocp::Stream stream = gmocp::load_stream(args.run.stream_path);
  const std::string stream_hash = gmocp::hash_file(args.run.stream_path);

  // Resume support: skip (method, N, J, seed, config, stream) tuples that
  // already have a row in the output table.
  std::set<std::string> done;
  if (std::filesystem::exists(args.run.out)) {
    for (const gmocp::ResultRow& row : gmocp::read_results(args.run.out)) {
      done.insert(row.method + "/" + std::to_string(row.n_trials) + "/" +
                  std::to_string(row.n_selective) + "/" + std::to_string(row.seed) + "/" +
                  row.config_hash + "/" + row.stream_hash);
    }
  }

  for (int n : args.n_grid) {
    for (int j : args.j_grid) {
      gmocp::RunConfig cfg = args.run.options.config;
      cfg.method = gmocp::Method::gmocp;
      cfg.n_trials = n;
      cfg.n_selective = j;
      const std::string cfg_hash = gmocp::config_hash(cfg);
      std::vector<std::uint64_t> pending;
      for (std::uint64_t seed : args.run.options.seeds) {
        const std::string key = "gmocp/" + std::to_string(n) + "/" + std::to_string(j) + "/" +
                                std::to_string(seed) + "/" + cfg_hash + "/" + stream_hash;
        if (done.find(key) == done.end()) pending.push_back(seed);
      }
      if (pending.empty()) {
        std::printf("gmocp N=%d J=%d: all %zu seeds already present, skipping\n", n, j,
                    args.run.options.seeds.size());
        continue;
      }
      const auto reports = run_seeds(stream, cfg, pending, args.run.jobs);
      std::vector<gmocp::ResultRow> rows;
      for (const gmocp::RunReport& report : reports) {
        rows.push_back(gmocp::make_result_row(report, stream_hash));
      }
      gmocp::append_results(args.run.out, rows);
      if (!args.run.per_step_dir.empty()) dump_per_step(args.run.per_step_dir, reports);
      std::printf("gmocp N=%d J=%d: ran %zu seeds\n", n, j, pending.size());
    }
  }
  return 0;
}

int cmd_report(const ReportArgs& args) {
  const auto rows = gmocp::read_results(args.results_path);
  if (rows.empty()) {
    std::fprintf(stderr, "no rows in %s\n", args.results_path.c_str());
    return kExitData;
  }
  const auto groups = gmocp::aggregate_results(rows);
  std::printf("%-8s %-4s %-4s %-5s %-18s %-18s %s\n", "method", "N", "J", "runs",
              "coverage (%)", "avg width", "runtime (s)");
  for (const gmocp::GroupStats& g : groups) {
    std::printf("%-8s %-4d %-4d %-5zu %-18s %-18s %s\n", g.key.method.c_str(), g.key.n_trials,
                g.key.n_selective, g.runs,
                gmocp::format_mean_std(100.0 * g.coverage_mean, 100.0 * g.coverage_std, 2).c_str(),
                gmocp::format_mean_std(g.width_mean, g.width_std, 2).c_str(),
                gmocp::format_mean_std(g.runtime_mean, g.runtime_std, 2).c_str());
  }
  if (!args.rolling_out.empty()) {
    if (args.per_step_path.empty()) {
      throw gmocp::DataError("--rolling-out needs --per-step <file>");
    }
    const auto steps = gmocp::read_per_step_log(args.per_step_path);
    gmocp::write_rolling_coverage(args.rolling_out, steps,
                                  static_cast<std::size_t>(args.window));
  }
  return 0;
}

void add_run_config_flags(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file with flat keys");
  cmd->add_option("--method", args.method, "gmocp | mocp | single");
  cmd->add_option("--model", args.options.config.model_index, "fixed model index (single)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--N", args.options.config.n_trials, "draws per selective node")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--J", args.options.config.n_selective, "number of selective nodes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", args.options.config.alpha_target, "target miscoverage");
  cmd->add_option("--eta", args.options.config.eta, "SF-OGD learning rate");
  cmd->add_option("--epsilon", args.options.config.epsilon, "weight-update step size");
  cmd->add_option("--eta-e", args.options.config.eta_e, "graph exploration rate");
  cmd->add_option("--xi", args.options.config.score.xi, "score rank penalty");
  cmd->add_option("--k-reg", args.options.config.score.k_reg, "score rank offset");
  cmd->add_option("--warmup", args.options.config.warmup, "steps excluded from metrics")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seeds", args.seeds, "seed list: '7', '0,2,5', or '0..9'");
  cmd->add_option("--jobs", args.jobs, "parallel runs")->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.out, "results CSV (appended)");
  cmd->add_option("--per-step-dir", args.per_step_dir, "directory for per-step logs");
}

// Config file first, then explicit flags on top.
void resolve_run_options(CLI::App* cmd, RunArgs& args) {
  RunArgs flag_values = args;  // flag results already live here
  if (!args.config_path.empty()) {
    gmocp::RunOptions from_file;
    from_file.config = gmocp::RunConfig{};
    gmocp::load_config_file(args.config_path, from_file);
    gmocp::RunOptions merged = from_file;
    auto overridden = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (overridden("--model")) merged.config.model_index = flag_values.options.config.model_index;
    if (overridden("--N")) merged.config.n_trials = flag_values.options.config.n_trials;
    if (overridden("--J")) merged.config.n_selective = flag_values.options.config.n_selective;
    if (overridden("--alpha")) merged.config.alpha_target = flag_values.options.config.alpha_target;
    if (overridden("--eta")) merged.config.eta = flag_values.options.config.eta;
    if (overridden("--epsilon")) merged.config.epsilon = flag_values.options.config.epsilon;
    if (overridden("--eta-e")) merged.config.eta_e = flag_values.options.config.eta_e;
    if (overridden("--xi")) merged.config.score.xi = flag_values.options.config.score.xi;
    if (overridden("--k-reg")) merged.config.score.k_reg = flag_values.options.config.score.k_reg;
    if (overridden("--warmup")) merged.config.warmup = flag_values.options.config.warmup;
    args.options = merged;
  }
  if (cmd->count("--method") > 0 || args.config_path.empty()) {
    if (!args.method.empty()) args.options.config.method = gmocp::parse_method(args.method);
  }
  if (cmd->count("--seeds") > 0) args.options.seeds = gmocp::parse_seed_spec(args.seeds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online conformal prediction over multi-model probability streams"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic stream file");
  generate->add_option("--out", gen.out, "output stream path")->required();
  generate->add_option("--models", gen.config.n_models, "number of models")
      ->check(CLI::PositiveNumber);
  generate->add_option("--labels", gen.config.n_labels, "number of labels")
      ->check(CLI::Range(2, 1 << 20));
  generate->add_option("--length", gen.config.length, "number of steps")
      ->check(CLI::PositiveNumber);
  generate->add_option("--drift", gen.drift, "gradual | abrupt")
      ->check(CLI::IsMember({"gradual", "abrupt"}));
  generate->add_option("--period", gen.config.drift.period, "gradual drift period");
  generate->add_option("--segments", gen.config.drift.n_segments, "abrupt drift regimes");
  generate->add_option("--amplitude", gen.config.drift.amplitude, "gradual drift amplitude");
  generate->add_option("--qualities", gen.qualities, "per-model accuracy levels")->delimiter(',');
  generate->add_option("--seed", gen.config.seed, "generator seed");

  RunArgs runArgs;
  CLI::App* runCmd = app.add_subcommand("run", "run one method over a seed list");
  runCmd->add_option("--stream", runArgs.stream_path, "stream file")->required();
  add_run_config_flags(runCmd, runArgs);

  SweepArgs sweepArgs;
  CLI::App* sweep = app.add_subcommand("sweep", "run gmocp over an (N, J) grid");
  sweep->add_option("--stream", sweepArgs.run.stream_path, "stream file")->required();
  add_run_config_flags(sweep, sweepArgs.run);
  sweep->add_option("--N-grid", sweepArgs.n_grid, "N values")->delimiter(',');
  sweep->add_option("--J-grid", sweepArgs.j_grid, "J values")->delimiter(',');

  ReportArgs rep;
  CLI::App* report = app.add_subcommand("report", "aggregate a results table");
  report->add_option("--results", rep.results_path, "results CSV")->required();
  report->add_option("--per-step", rep.per_step_path, "per-step log for rolling coverage");
  report->add_option("--rolling-out", rep.rolling_out, "rolling-coverage CSV to write");
  report->add_option("--window", rep.window, "rolling window length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (runCmd->parsed()) {
      resolve_run_options(runCmd, runArgs);
      return cmd_run(runArgs);
    }
    if (sweep->parsed()) {
      resolve_run_options(sweep, sweepArgs.run);
      return cmd_sweep(sweepArgs);
    }
    if (report->parsed()) return cmd_report(rep);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
