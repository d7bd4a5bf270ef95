#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tvopt/diagnostics.hpp"
#include "tvopt/experiment.hpp"

namespace tvopt {

// Writers for every file the harness emits. Floating point values are
// printed with 17 significant digits; non-finite values as "nan"/"inf".

std::string format_double(double value);

inline constexpr const char* kResultsHeader =
    "experiment,trial,N,seed,rmse,a_err_fro,a_err_spec,min_alpha_k,clipped,clamp_count,"
    "projections,status";

void write_results_csv(std::ostream& out, std::span<const TrialRecord> records);
void write_summary_json(std::ostream& out, const SweepResult& sweep);

/// Truth and collected data: t,phase,theta_true_*,x_*,y_* for t = 0..T.
void write_bundle_csv(std::ostream& out, const TrajectoryBundle& bundle, int n, int p);

/// t,phase,xhat_*,xstar_*,theta_hat_*,theta_true_*,projected for t = 0..T.
/// Collect-phase rows carry the exploration iterate and empty theta_hat.
void write_trajectory_csv(std::ostream& out, const PipelineRun& run, double mu_floor);

void write_estimates_csv(std::ostream& out, const EstimateSeries& series);
/// Row-major matrix, one line per row, no header.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_diagnostics_csv(std::ostream& out, std::span<const BoundComponents> rows);

/// Header column names for the trajectory and bundle schemas.
std::vector<std::string> trajectory_columns(int n, int p);
std::vector<std::string> bundle_columns(int n, int p);

// Opens `path` for binary writing, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace tvopt
