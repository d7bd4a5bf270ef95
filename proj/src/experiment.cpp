#include "tvopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "tvopt/errors.hpp"

namespace tvopt {

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& experiment_id, std::size_t n,
                         std::size_t trial) {
  std::uint64_t h = splitmix64_mix(base_seed);
  h = splitmix64_mix(h ^ fnv1a64(experiment_id));
  h = splitmix64_mix(h ^ static_cast<std::uint64_t>(n));
  h = splitmix64_mix(h ^ static_cast<std::uint64_t>(trial));
  return h;
}

std::shared_ptr<const GradientOracleModel> model_for(const ExperimentConfig& config) {
  // With noise disabled the weighting matrix is the identity; the estimate
  // itself does not depend on a uniform scale of R.
  const double weight = config.sigma_m > 0.0 ? config.sigma_m : 1.0;
  return make_problem(config.problem_id, weight);
}

LatentDynamics truth_dynamics(const ExperimentConfig& config, std::size_t n, std::size_t trial) {
  const std::uint64_t seed =
      config.fixed_a ? splitmix64_mix(splitmix64_mix(config.seed) ^ fnv1a64(config.experiment_id))
                     : trial_seed(config.seed, config.experiment_id, n, trial);
  SeededRng rng(seed, kStreamDynamics);
  return random_stable_dynamics(config.p(), config.eig_lo, config.eig_hi, config.sigma_p, rng);
}

PipelineRun simulate_run(const ExperimentConfig& config, std::size_t n, std::size_t trial) {
  PipelineRun run;
  run.n = n;
  run.k = config.window_for(n);
  run.model = model_for(config);
  run.record.experiment = config.experiment_id;
  run.record.trial = trial;
  run.record.n = n;
  run.record.seed = trial_seed(config.seed, config.experiment_id, n, trial);
  run.dynamics = std::make_unique<LatentDynamics>(truth_dynamics(config, n, trial));

  SeededRng latent_rng(run.record.seed, kStreamLatent);
  if (config.theta_mean.size() > 0) {
    const auto& model = *run.model;
    const double mu = config.mu_floor;
    AdmissibleProjector project = [&model, mu](Vector& theta) {
      return model.project_admissible(theta, mu);
    };
    AdmissiblePath path;
    if (config.theta0.size() > 0) {
      // Explicit initial deviation: same recursion, without the stationary draw.
      auto deviation = simulate_latent(*run.dynamics, config.theta0, config.horizon_T, latent_rng);
      for (auto& d : deviation) {
        Vector theta = config.theta_mean + d;
        if (project(theta)) ++path.clamp_count;
        path.theta.push_back(std::move(theta));
      }
    } else {
      path = simulate_latent_admissible(*run.dynamics, config.theta_mean, project,
                                        config.horizon_T, latent_rng);
    }
    run.bundle.theta = std::move(path.theta);
    run.bundle.clamp_count = path.clamp_count;
    run.bundle.offset = config.theta_mean;
  } else {
    const Vector theta0 = config.theta0.size() > 0
                              ? config.theta0
                              : latent_rng.gaussian(psd_factor(run.dynamics->stationary_covariance()));
    run.bundle.theta = simulate_latent(*run.dynamics, theta0, config.horizon_T, latent_rng);
  }
  run.record.clamp_count = run.bundle.clamp_count;

  SeededRng measurement_rng(run.record.seed, kStreamMeasurement);
  const MeasurementNoise noise = config.sigma_m > 0.0 ? MeasurementNoise::kOn : MeasurementNoise::kOff;
  TrajectoryBundle collected = explore_collect(*run.model, run.bundle.theta, config.exploration, n,
                                               measurement_rng, noise);
  run.bundle.x = std::move(collected.x);
  run.bundle.y = std::move(collected.y);
  return run;
}

PipelineRun run_pipeline(const ExperimentConfig& config, std::size_t n, std::size_t trial) {
  PipelineRun run = simulate_run(config, n, trial);
  run.series = estimate_all(run.bundle, *run.model, run.k, config.gm_method);
  run.record.min_alpha_k = run.series.min_alpha_k;
  run.ident = config.theta_mean.size() > 0
                  ? iv_identify_centered(run.series.estimates, run.k, config.epsilon)
                  : iv_identify(run.series.estimates, run.k, config.epsilon);
  run.record.clipped = run.ident.clipped;
  const IdentificationError err = identification_error(run.ident.a_hat, run.dynamics->a());
  run.record.a_err_frobenius = err.frobenius;
  run.record.a_err_spectral = err.spectral;

  NewtonOptions options;
  options.mu_floor = config.mu_floor;
  run.points = track(*run.model, run.ident, run.series, run.bundle, options);

  std::vector<Vector> predicted;
  std::vector<Vector> truth;
  for (const auto& pt : run.points) {
    if (pt.projected) ++run.record.projections;
    if (pt.t >= config.t_eval && pt.t <= config.horizon_T) {
      predicted.push_back(pt.x_hat);
      truth.push_back(pt.x_star);
    }
  }
  run.record.rmse = rmse(predicted, truth, config.t_eval, config.horizon_T);
  if (!std::isfinite(run.record.rmse))
    throw SimulationError("tracking RMSE is not finite");
  return run;
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t n, std::size_t trial) {
  try {
    return run_pipeline(config, n, trial).record;
  } catch (const std::exception& e) {
    TrialRecord rec;
    rec.experiment = config.experiment_id;
    rec.trial = trial;
    rec.n = n;
    rec.seed = trial_seed(config.seed, config.experiment_id, n, trial);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.rmse = rec.a_err_frobenius = rec.a_err_spectral = rec.min_alpha_k = nan;
    rec.ok = false;
    rec.failure = e.what();
    return rec;
  }
}

std::size_t SweepResult::failed() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const TrialRecord& r) { return !r.ok; }));
}

bool SweepResult::excessive_failures() const {
  return static_cast<double>(failed()) > 0.10 * static_cast<double>(records.size());
}

std::vector<SweepSummaryRow> summarize(const std::vector<TrialRecord>& records,
                                       const std::vector<std::size_t>& n_values) {
  std::vector<SweepSummaryRow> rows;
  for (std::size_t n : n_values) {
    SweepSummaryRow row;
    row.n = n;
    std::vector<double> rmse_values;
    double a_err_sum = 0.0;
    for (const auto& r : records) {
      if (r.n != n) continue;
      if (!r.ok) {
        ++row.trials_failed;
        continue;
      }
      ++row.trials_ok;
      rmse_values.push_back(r.rmse);
      a_err_sum += r.a_err_frobenius;
    }
    if (!rmse_values.empty()) {
      double sum = 0.0;
      for (double v : rmse_values) sum += v;
      row.mean_rmse = sum / static_cast<double>(rmse_values.size());
      row.mean_a_err_fro = a_err_sum / static_cast<double>(rmse_values.size());
      if (rmse_values.size() > 1) {
        double ss = 0.0;
        for (double v : rmse_values) ss += (v - row.mean_rmse) * (v - row.mean_rmse);
        row.std_rmse = std::sqrt(ss / static_cast<double>(rmse_values.size() - 1));
      }
    } else {
      row.mean_rmse = row.std_rmse = row.mean_a_err_fro = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  validate(config);
  struct Job {
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t n : config.n_values)
    for (std::size_t trial = 0; trial < config.trials; ++trial) jobs.push_back({n, trial});

  SweepResult result;
  result.experiment = config.experiment_id;
  result.records.resize(jobs.size());

  unsigned workers = config.workers != 0 ? config.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
      result.records[i] = run_trial(config, jobs[i].n, jobs[i].trial);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  result.summary = summarize(result.records, config.n_values);
  return result;
}

}  // namespace tvopt
