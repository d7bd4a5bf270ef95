#include <cmath>
#include <sstream>

#include "tvopt/errors.hpp"
#include "tvopt/experiment.hpp"

namespace tvopt {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

SelftestCheck lyapunov_check() {
  SeededRng rng(11, 0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int p = 2 + i % 6;
    const LatentDynamics dyn = random_stable_dynamics(p, 0.5, 0.99, 0.1 + 0.05 * (i % 3), rng);
    worst = std::max(worst, dyn.lyapunov_residual() / (1.0 + dyn.q().norm()));
  }
  return {"lyapunov residual", worst <= 1e-10, "max relative residual " + fmt(worst)};
}

SelftestCheck gain_check() {
  SeededRng rng(12, 0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int p = 3 + i % 4;
    const int rows = p + 2 + i % 5;
    StackedWindow w;
    w.c_bar = Matrix(rows, p);
    for (int c = 0; c < p; ++c)
      for (int r = 0; r < rows; ++r) w.c_bar(r, c) = rng.normal();
    w.y_bar = rng.normal_vector(rows);
    const Matrix f = Matrix::NullaryExpr(rows, rows, [&] { return rng.normal(); });
    w.r_bar = f * f.transpose() + Matrix::Identity(rows, rows);
    worst = std::max(worst, gauss_markov_gain_check(w));
  }
  return {"Gauss-Markov unbiasedness K*C = I", worst <= 1e-10, "max residual " + fmt(worst)};
}

std::vector<SelftestCheck> exact_recovery_checks() {
  std::vector<SelftestCheck> out;
  const ExperimentConfig config = exact_recovery_config();
  const PipelineRun run = run_pipeline(config, config.n_values.front(), 0);
  double worst = 0.0;
  for (const auto& est : run.series.estimates)
    worst = std::max(worst, (est.theta_tilde - run.bundle.theta[est.t]).cwiseAbs().maxCoeff());
  out.push_back({"noiseless reconstruction", worst <= 1e-10, "max |theta~ - theta| " + fmt(worst)});
  const double iv_err = identification_error(run.ident.a_hat, run.dynamics->a()).frobenius;
  out.push_back({"noiseless IV identification", iv_err <= 1e-8, "||A_iv - A||_F " + fmt(iv_err)});
  const IdentifiedDynamics ols = ols_identify(run.series.estimates);
  const double ols_err = identification_error(ols.a_hat, run.dynamics->a()).frobenius;
  out.push_back({"noiseless OLS identification", ols_err <= 1e-8, "||A_ols - A||_F " + fmt(ols_err)});
  out.push_back({"noiseless tracking RMSE", run.record.rmse <= 1e-6, "rmse " + fmt(run.record.rmse)});
  return out;
}

SelftestCheck newton_check() {
  const CongestionProblem model(Matrix::Identity(2, 2));
  SeededRng rng(13, 0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vector theta(7);
    theta(0) = rng.uniform(0.2, 2.0);
    for (int j = 1; j < 7; ++j) theta(j) = rng.uniform(0.0, 2.0);
    const MinimizerResult res = recover_minimizer_newton(model, theta, Vector::Zero(2));
    worst = std::max(worst, res.residual_norm);
  }
  return {"Newton first-order optimality", worst <= 1e-8, "max residual " + fmt(worst)};
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  std::vector<SelftestCheck> checks;
  auto guarded = [&checks](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      checks.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("lyapunov residual", [&] { checks.push_back(lyapunov_check()); });
  guarded("Gauss-Markov unbiasedness", [&] { checks.push_back(gain_check()); });
  guarded("noiseless pipeline", [&] {
    for (auto& c : exact_recovery_checks()) checks.push_back(std::move(c));
  });
  guarded("Newton recovery", [&] { checks.push_back(newton_check()); });
  return checks;
}

}  // namespace tvopt
