#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tvopt/estimation.hpp"
#include "tvopt/identification.hpp"
#include "tvopt/problem.hpp"
#include "tvopt/simulation.hpp"

namespace tvopt {

inline constexpr double kDefaultMuFloor = 1e-3;

struct Forecast {
  std::size_t t = 0;
  std::size_t horizon_exponent = 0;  // H = t - (N - k)
  Vector theta_hat;
  Vector anchor;
};

/// theta_hat(t) = A^H theta_tilde(N-k) with H = t - (N-k), by repeated
/// matrix-vector products with the (possibly stabilized) forecast matrix.
/// With a centered fit this becomes m + A^H (theta_tilde(N-k) - m).
Forecast forecast(const IdentifiedDynamics& ident, const WindowedEstimate& anchor,
                  std::size_t t_target, std::size_t n_collect, std::size_t k);

enum class MinimizerMethod { kClosedForm, kNewton };

struct MinimizerResult {
  Vector x_hat;
  double residual_norm = 0.0;  // ||C(x_hat) theta||
  int iterations = 0;
  MinimizerMethod method = MinimizerMethod::kClosedForm;
  bool projected = false;
};

struct NewtonOptions {
  double tol = 1e-10;      // on the gradient norm
  int max_iter = 100;
  double mu_floor = kDefaultMuFloor;
  double armijo = 1e-4;
  double min_step = 0x1.0p-30;
};

/// Success criterion shared by every recovery path.
inline constexpr double kMinimizerResidualTolerance = 1e-8;

/// x = H^-1 b~ for theta = (b~1, b~2, h11, h12, h22), lifting eigenvalues of H
/// below mu_floor first.
MinimizerResult recover_minimizer_quadratic(const Vector& theta_hat,
                                            double mu_floor = kDefaultMuFloor);

/// Damped Newton with Armijo backtracking on f(., theta) after projecting
/// theta onto the model's admissible set. Throws NonconvergenceError with the
/// best iterate if the gradient tolerance is not met within max_iter.
MinimizerResult recover_minimizer_newton(const GradientOracleModel& model, const Vector& theta_hat,
                                         const Vector& x_init, const NewtonOptions& options = {});

/// Closed form when the family has one, otherwise Newton.
MinimizerResult recover_minimizer(const GradientOracleModel& model, const Vector& theta,
                                  const Vector& x_init, const NewtonOptions& options = {});

struct TrackPoint {
  std::size_t t = 0;
  std::size_t horizon_exponent = 0;
  Vector x_hat;
  Vector x_star;
  Vector theta_hat;
  Vector theta_true;
  bool projected = false;  // forecast needed projection before solving
};

/// Forecast and minimizer for every t in [N, T]; the truth x*(t) comes from
/// the same recovery routine applied to theta(t). Newton solves are warm
/// started from the previous step, and from x(N-1) at t = N.
std::vector<TrackPoint> track(const GradientOracleModel& model, const IdentifiedDynamics& ident,
                              const EstimateSeries& series, const TrajectoryBundle& bundle,
                              const NewtonOptions& options = {});

/// sqrt(mean ||pred - truth||^2) over t = t_eval..t_end, with both sequences
/// covering exactly that window.
double rmse(std::span<const Vector> predicted, std::span<const Vector> truth, std::size_t t_eval,
            std::size_t t_end);

}  // namespace tvopt
