// tvopt: command-line driver for the tracking pipeline.
//
//   tvopt simulate --config cfg   truth path + collected measurements
//   tvopt track    --config cfg   one end-to-end run with trajectory CSV
//   tvopt sweep    --config cfg   Monte Carlo sweep over N
//   tvopt diagnose --config cfg   computable error-bound components
//   tvopt selftest                noiseless invariant suite
//
// Exit codes: 0 success, 1 configuration error, 2 excessive trial failures.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tvopt/config.hpp"
#include "tvopt/csv_io.hpp"
#include "tvopt/diagnostics.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTrials = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> n_override;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_n) {
  cmd->add_option("--config", opts.config_path, "experiment config file")->required();
  cmd->add_option("--seed", opts.seed, "base seed (overrides mc.seed)");
  cmd->add_option("--out", opts.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--trials", opts.trials, "trials per N (overrides mc.trials)");
  if (with_n) cmd->add_option("--N", opts.n_override, "training horizon (overrides horizon.N_track)");
  cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

tvopt::ExperimentConfig load(const CommonOptions& opts) {
  tvopt::ExperimentConfig config = tvopt::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.out_dir) config.output_dir = *opts.out_dir;
  if (opts.trials) config.trials = *opts.trials;
  if (opts.n_override) config.n_track = *opts.n_override;
  tvopt::validate(config);
  return config;
}

std::filesystem::path out_file(const tvopt::ExperimentConfig& config, const std::string& name) {
  return std::filesystem::path(config.output_dir) / name;
}

int cmd_simulate(const CommonOptions& opts) {
  const auto config = load(opts);
  const std::size_t n = config.track_n();
  const tvopt::PipelineRun run = tvopt::simulate_run(config, n, 0);
  const auto path = out_file(config, "bundle.csv");
  auto out = tvopt::open_output(path);
  tvopt::write_bundle_csv(out, run.bundle, run.model->n(), run.model->p());
  if (!opts.quiet)
    std::cout << "wrote " << path.string() << " (T = " << config.horizon_T << ", N = " << n
              << ", clamped steps = " << run.bundle.clamp_count << ")\n";
  return kExitOk;
}

int cmd_track(const CommonOptions& opts) {
  const auto config = load(opts);
  const std::size_t n = config.track_n();
  tvopt::PipelineRun run;
  try {
    run = tvopt::run_pipeline(config, n, 0);
  } catch (const tvopt::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "track failed: " << e.what() << '\n';
    return kExitTrials;
  }
  {
    auto out = tvopt::open_output(out_file(config, "trajectory.csv"));
    tvopt::write_trajectory_csv(out, run, config.mu_floor);
  }
  {
    auto out = tvopt::open_output(out_file(config, "estimates.csv"));
    tvopt::write_estimates_csv(out, run.series);
  }
  {
    auto out = tvopt::open_output(out_file(config, "a_hat.csv"));
    tvopt::write_matrix_csv(out, run.ident.a_hat);
  }
  if (!opts.quiet) {
    std::cout << config.experiment_id << ": N = " << n << ", k = " << run.k
              << ", rmse = " << tvopt::format_double(run.record.rmse)
              << ", ||A_hat - A||_F = " << tvopt::format_double(run.record.a_err_frobenius)
              << ", min alpha_k = " << tvopt::format_double(run.record.min_alpha_k) << '\n'
              << "wrote trajectory.csv, estimates.csv, a_hat.csv to " << config.output_dir << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const auto config = load(opts);
  const tvopt::SweepResult sweep = tvopt::run_sweep(config);
  {
    auto out = tvopt::open_output(out_file(config, "results.csv"));
    tvopt::write_results_csv(out, sweep.records);
  }
  {
    auto out = tvopt::open_output(out_file(config, "summary.json"));
    tvopt::write_summary_json(out, sweep);
  }
  if (!opts.quiet) {
    std::cout << config.experiment_id << ": " << sweep.records.size() << " trials, "
              << sweep.failed() << " failed\n";
    for (const auto& row : sweep.summary)
      std::cout << "  N = " << row.n << "  mean rmse = " << tvopt::format_double(row.mean_rmse)
                << "  mean ||A_hat - A||_F = " << tvopt::format_double(row.mean_a_err_fro) << '\n';
  }
  if (sweep.excessive_failures()) {
    std::cerr << "more than 10% of trials failed\n";
    return kExitTrials;
  }
  return kExitOk;
}

int cmd_diagnose(const CommonOptions& opts) {
  const auto config = load(opts);
  const std::size_t n = config.track_n();
  tvopt::PipelineRun run;
  try {
    run = tvopt::run_pipeline(config, n, 0);
  } catch (const tvopt::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "diagnose failed: " << e.what() << '\n';
    return kExitTrials;
  }
  const std::size_t max_h = config.horizon_T - (n - run.k);
  const auto rows = tvopt::bound_components(*run.dynamics, run.series.estimates, max_h);
  const auto path = out_file(config, "diagnostics.csv");
  auto out = tvopt::open_output(path);
  tvopt::write_diagnostics_csv(out, rows);
  if (!opts.quiet) std::cout << "wrote " << path.string() << " (H = 0.." << max_h << ")\n";
  return kExitOk;
}

int cmd_selftest(bool quiet) {
  const auto checks = tvopt::run_selftest();
  int failed = 0;
  for (const auto& c : checks) {
    if (!c.passed) ++failed;
    if (!quiet || !c.passed)
      std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
  }
  std::cout << "selftest: " << (checks.size() - failed) << "/" << checks.size() << " passed\n";
  return failed == 0 ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking time-varying minimizers from noisy gradient measurements"};
  app.require_subcommand(1);

  CommonOptions simulate_opts, track_opts, sweep_opts, diagnose_opts;
  bool selftest_quiet = false;
  auto* simulate = app.add_subcommand("simulate", "dump the truth path and collected measurements");
  add_common(simulate, simulate_opts, true);
  auto* track = app.add_subcommand("track", "single end-to-end run with trajectory CSV");
  add_common(track, track_opts, true);
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over the training horizons");
  add_common(sweep, sweep_opts, false);
  auto* diagnose = app.add_subcommand("diagnose", "write the computable error-bound components");
  add_common(diagnose, diagnose_opts, true);
  auto* selftest = app.add_subcommand("selftest", "run the noiseless invariant suite");
  selftest->add_flag("--quiet", selftest_quiet, "only print failures and the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(simulate_opts);
    if (*track) return cmd_track(track_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*diagnose) return cmd_diagnose(diagnose_opts);
    if (*selftest) return cmd_selftest(selftest_quiet);
  } catch (const tvopt::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tvopt::ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTrials;
  }
  return kExitOk;
}
