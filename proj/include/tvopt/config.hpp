#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvopt/estimation.hpp"
#include "tvopt/linalg.hpp"
#include "tvopt/simulation.hpp"

namespace tvopt {

/// Complete, reproducible description of a Monte Carlo experiment.
///
/// Text format: one `section.key = value` per line, `#` starts a comment,
/// lists are comma separated and point lists (explore.sequence) separate
/// points with `;`. Every key is optional except experiment.id and
/// problem.id; unknown or repeated keys are errors.
struct ExperimentConfig {
  std::string experiment_id;
  std::string problem_id;

  std::size_t k = 1;
  // Shrink k to floor((N - p) / 2) for training horizons with N < 2k + p.
  bool auto_shrink_window = false;
  GaussMarkovMethod gm_method = GaussMarkovMethod::kWhitenedQr;

  std::vector<std::size_t> n_values;
  std::optional<std::size_t> n_track;  // N used by single runs; default max(n_values)
  std::size_t horizon_T = 0;
  std::size_t t_eval = 0;

  double sigma_m = 0.0;
  double sigma_p = 0.0;

  ExplorationPolicy exploration;

  double eig_lo = 0.90;
  double eig_hi = 0.99;
  bool fixed_a = false;
  Vector theta_mean;  // empty: zero-mean linear Gaussian process
  Vector theta0;      // empty: stationary initial draw

  double epsilon = 1e-3;
  double mu_floor = 1e-3;

  std::size_t trials = 1;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = available parallelism
  std::string output_dir = "out";

  int n() const;
  int p() const;
  std::size_t track_n() const;
  /// Window length used at training horizon N (k, or the shrunk value).
  std::size_t window_for(std::size_t n_collect) const;
};

/// Throws ConfigError naming the offending key or invariant.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

std::vector<std::string> config_keys();

/// Noise-free n = p = 3 exact-recovery setup (window 1, N = 50, T = 100).
ExperimentConfig exact_recovery_config();

}  // namespace tvopt
