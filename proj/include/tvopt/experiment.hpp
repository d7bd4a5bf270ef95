#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tvopt/config.hpp"
#include "tvopt/estimation.hpp"
#include "tvopt/identification.hpp"
#include "tvopt/problem.hpp"
#include "tvopt/simulation.hpp"
#include "tvopt/tracking.hpp"

namespace tvopt {

// Random streams used inside one trial. Each stage owns a stream so that,
// for example, changing the exploration policy leaves the truth unchanged.
enum RngStream : std::uint64_t {
  kStreamDynamics = 0,
  kStreamLatent = 1,
  kStreamMeasurement = 2,
};

/// Per-trial seed: SplitMix64 chain
///   h = mix(base); h = mix(h ^ fnv1a64(id)); h = mix(h ^ N); h = mix(h ^ trial).
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& experiment_id, std::size_t n,
                         std::size_t trial);

struct TrialRecord {
  std::string experiment;
  std::size_t trial = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double a_err_frobenius = 0.0;
  double a_err_spectral = 0.0;
  double min_alpha_k = 0.0;
  bool clipped = false;
  std::size_t clamp_count = 0;
  std::size_t projections = 0;
  bool ok = true;
  std::string failure;  // reason when !ok

  std::string status() const { return ok ? "ok" : "failed: " + failure; }
  bool operator==(const TrialRecord&) const = default;
};

/// Everything produced by one end-to-end run, kept for the single-run CLI
/// commands and for tests that inspect intermediate stages.
struct PipelineRun {
  std::shared_ptr<const GradientOracleModel> model;
  std::unique_ptr<LatentDynamics> dynamics;
  TrajectoryBundle bundle;
  EstimateSeries series;
  IdentifiedDynamics ident;
  std::vector<TrackPoint> points;
  std::size_t n = 0;
  std::size_t k = 0;
  TrialRecord record;
};

std::shared_ptr<const GradientOracleModel> model_for(const ExperimentConfig& config);

/// Ground-truth dynamics for (N, trial); with truth.fixed_A the same A is
/// shared by every trial of the experiment.
LatentDynamics truth_dynamics(const ExperimentConfig& config, std::size_t n, std::size_t trial);

/// Truth path and collected measurements only (no estimation).
PipelineRun simulate_run(const ExperimentConfig& config, std::size_t n, std::size_t trial);

/// Full pipeline; stage errors propagate as exceptions.
PipelineRun run_pipeline(const ExperimentConfig& config, std::size_t n, std::size_t trial);

/// Like run_pipeline but never throws on stage failures: they are reported
/// in the record's status.
TrialRecord run_trial(const ExperimentConfig& config, std::size_t n, std::size_t trial);

struct SweepSummaryRow {
  std::size_t n = 0;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  double mean_a_err_fro = 0.0;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
};

struct SweepResult {
  std::string experiment;
  std::vector<TrialRecord> records;  // (N, trial) order as listed in the config
  std::vector<SweepSummaryRow> summary;

  std::size_t failed() const;
  // More than 10% of trials failed.
  bool excessive_failures() const;
};

/// M trials for each N on a bounded worker pool. Output order does not
/// depend on scheduling.
SweepResult run_sweep(const ExperimentConfig& config);

std::vector<SweepSummaryRow> summarize(const std::vector<TrialRecord>& records,
                                       const std::vector<std::size_t>& n_values);

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Noise-free invariant suite used by `tvopt selftest`.
std::vector<SelftestCheck> run_selftest();

}  // namespace tvopt
