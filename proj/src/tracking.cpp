#include "tvopt/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

std::string format_residual(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", r);
  return buf;
}

}  // namespace

Forecast forecast(const IdentifiedDynamics& ident, const WindowedEstimate& anchor,
                  std::size_t t_target, std::size_t n_collect, std::size_t k) {
  if (k == 0 || k > n_collect) throw ArgumentError("forecast: need 1 <= k <= N");
  if (t_target < n_collect) throw ArgumentError("forecast: target time precedes N");
  if (anchor.t != n_collect - k)
    throw ArgumentError("forecast: anchor must be the estimate at t = N - k");
  const Matrix& a = ident.a_forecast;
  if (a.rows() != anchor.theta_tilde.size() || a.cols() != anchor.theta_tilde.size())
    throw ArgumentError("forecast: dynamics and anchor dimensions differ");
  Forecast out;
  out.t = t_target;
  out.horizon_exponent = t_target - (n_collect - k);
  out.anchor = anchor.theta_tilde;
  const bool centered = ident.center.size() > 0;
  if (centered && ident.center.size() != anchor.theta_tilde.size())
    throw ArgumentError("forecast: center and anchor dimensions differ");
  Vector theta = centered ? Vector(anchor.theta_tilde - ident.center) : anchor.theta_tilde;
  for (std::size_t i = 0; i < out.horizon_exponent; ++i) theta = a * theta;
  if (centered) theta += ident.center;
  out.theta_hat = std::move(theta);
  return out;
}

MinimizerResult recover_minimizer_quadratic(const Vector& theta_hat, double mu_floor) {
  if (theta_hat.size() != 5)
    throw ArgumentError("quadratic recovery expects theta = (b1, b2, h11, h12, h22)");
  static const QuadraticTrackingProblem layout(Matrix::Identity(2, 2));
  Vector theta = theta_hat;
  MinimizerResult out;
  out.method = MinimizerMethod::kClosedForm;
  out.projected = layout.project_admissible(theta, mu_floor);
  out.x_hat = layout.closed_form_minimizer(theta);
  out.residual_norm = evaluate_gradient(layout, out.x_hat, theta).norm();
  return out;
}

MinimizerResult recover_minimizer_newton(const GradientOracleModel& model, const Vector& theta_hat,
                                         const Vector& x_init, const NewtonOptions& options) {
  if (theta_hat.size() != model.p() || x_init.size() != model.n())
    throw ArgumentError("recover_minimizer_newton: dimension mismatch");
  Vector theta = theta_hat;
  MinimizerResult out;
  out.method = MinimizerMethod::kNewton;
  out.projected = model.project_admissible(theta, options.mu_floor);

  Vector x = x_init;
  Vector grad = evaluate_gradient(model, x, theta);
  double residual = grad.norm();
  Vector best = x;
  double best_residual = residual;
  int it = 0;
  for (; it < options.max_iter && residual > options.tol; ++it) {
    const Matrix hess = model.hessian(x, theta);
    const Vector dir = -hess.ldlt().solve(grad);
    const double slope = grad.dot(dir);
    const double f0 = evaluate_cost(model, x, theta);
    // Cost differences below this are rounding, not decrease.
    const double f_noise = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
    double step = 1.0;
    bool accepted = false;
    Vector candidate;
    while (step >= options.min_step) {
      candidate = x + step * dir;
      const double f1 = evaluate_cost(model, candidate, theta);
      if (f1 <= f0 + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      if (step == 1.0 && f1 <= f0 + f_noise &&
          evaluate_gradient(model, candidate, theta).norm() < residual) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Near the optimum the decrease is below the resolution of f; fall back
      // to the full step whenever it still shrinks the gradient.
      candidate = x + dir;
      if (!(evaluate_gradient(model, candidate, theta).norm() < residual)) break;
    }
    x = std::move(candidate);
    grad = evaluate_gradient(model, x, theta);
    residual = grad.norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = x;
    }
  }
  // The loop stops at tol. Rounding can keep the gradient above it, so the
  // solve is also accepted below kMinimizerResidualTolerance scaled by the
  // size of theta (forecasts far from the data can be large).
  const double accept = kMinimizerResidualTolerance * std::max(1.0, theta.norm());
  if (best_residual <= options.tol || best_residual <= accept) {
    out.x_hat = best;
    out.residual_norm = best_residual;
    out.iterations = it;
    return out;
  }
  throw NonconvergenceError("Newton recovery did not converge (residual " +
                                format_residual(best_residual) + " after " + std::to_string(it) +
                                " iterations)",
                            best, best_residual);
}

MinimizerResult recover_minimizer(const GradientOracleModel& model, const Vector& theta,
                                  const Vector& x_init, const NewtonOptions& options) {
  if (model.id() == QuadraticTrackingProblem::kId)
    return recover_minimizer_quadratic(theta, options.mu_floor);
  if (model.has_closed_form()) {
    Vector projected = theta;
    MinimizerResult out;
    out.method = MinimizerMethod::kClosedForm;
    out.projected = model.project_admissible(projected, options.mu_floor);
    out.x_hat = model.closed_form_minimizer(projected);
    out.residual_norm = evaluate_gradient(model, out.x_hat, projected).norm();
    return out;
  }
  return recover_minimizer_newton(model, theta, x_init, options);
}

std::vector<TrackPoint> track(const GradientOracleModel& model, const IdentifiedDynamics& ident,
                              const EstimateSeries& series, const TrajectoryBundle& bundle,
                              const NewtonOptions& options) {
  const std::size_t n_collect = bundle.collected();
  const std::size_t k = series.window;
  const std::size_t horizon = bundle.horizon();
  if (n_collect == 0 || series.estimates.size() != n_collect - k + 1)
    throw ArgumentError("track: estimate series does not match the collected data");
  if (horizon < n_collect) throw ArgumentError("track: truth path ends before N");
  const WindowedEstimate& anchor = series.estimates.back();

  std::vector<TrackPoint> points;
  points.reserve(horizon - n_collect + 1);
  Vector warm_hat = bundle.x.back();
  Vector warm_star = bundle.x.back();
  Forecast fc = forecast(ident, anchor, n_collect, n_collect, k);
  const bool centered = ident.center.size() > 0;
  Vector deviation = centered ? Vector(fc.theta_hat - ident.center) : fc.theta_hat;
  for (std::size_t t = n_collect; t <= horizon; ++t) {
    if (t > n_collect) {
      deviation = ident.a_forecast * deviation;
      fc.theta_hat = centered ? Vector(deviation + ident.center) : deviation;
      fc.t = t;
      ++fc.horizon_exponent;
    }
    TrackPoint pt;
    pt.t = t;
    pt.horizon_exponent = fc.horizon_exponent;
    pt.theta_hat = fc.theta_hat;
    pt.theta_true = bundle.theta[t];
    try {
      const MinimizerResult hat = recover_minimizer(model, pt.theta_hat, warm_hat, options);
      const MinimizerResult star = recover_minimizer(model, pt.theta_true, warm_star, options);
      pt.x_hat = hat.x_hat;
      pt.x_star = star.x_hat;
      pt.projected = hat.projected;
    } catch (const NonconvergenceError& e) {
      throw NonconvergenceError("t = " + std::to_string(t) + ": " + e.what(), e.best_iterate(),
                                e.residual());
    }
    warm_hat = pt.x_hat;
    warm_star = pt.x_star;
    points.push_back(std::move(pt));
  }
  return points;
}

double rmse(std::span<const Vector> predicted, std::span<const Vector> truth, std::size_t t_eval,
            std::size_t t_end) {
  if (t_end < t_eval) throw ArgumentError("rmse: empty evaluation window");
  const std::size_t count = t_end - t_eval + 1;
  if (predicted.size() != count || truth.size() != count)
    throw ArgumentError("rmse: sequences must cover exactly [T_eval, T]");
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (predicted[i].size() != truth[i].size()) throw ArgumentError("rmse: dimension mismatch");
    sum += (predicted[i] - truth[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

}  // namespace tvopt
