#include "tvopt/identification.hpp"

#include <string>
#include <vector>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

// A solving A * lhs = rhs, i.e. lhs^T A^T = rhs^T.
Matrix solve_right(const Matrix& rhs, const Matrix& lhs, double* condition) {
  *condition = condition_number(lhs);
  if (!(*condition <= kMaxMomentCondition))
    throw IllConditionedError("sample moment condition number " + std::to_string(*condition) +
                                  " exceeds 1e12",
                              *condition);
  Matrix at = lhs.transpose().colPivHouseholderQr().solve(rhs.transpose());
  return at.transpose();
}

IdentifiedDynamics finish(Matrix a_hat, double condition, std::size_t samples, double epsilon) {
  IdentifiedDynamics out;
  out.spectral_radius = spectral_radius(a_hat);
  auto [a_forecast, clipped] = stabilize(a_hat, epsilon);
  out.a_hat = std::move(a_hat);
  out.a_forecast = std::move(a_forecast);
  out.clipped = clipped;
  out.m0_condition = condition;
  out.sample_count = samples;
  return out;
}

}  // namespace

std::pair<Matrix, bool> stabilize(const Matrix& a_hat, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 0.1))
    throw ArgumentError("stabilization epsilon must lie in (0, 0.1]");
  const double rho = spectral_radius(a_hat);
  if (rho < 1.0) return {a_hat, false};
  return {a_hat * ((1.0 - epsilon) / rho), true};
}

IdentifiedDynamics iv_identify(std::span<const WindowedEstimate> estimates, std::size_t k,
                               double epsilon) {
  if (k == 0) throw ArgumentError("iv_identify: window length must be positive");
  if (estimates.empty()) throw InsufficientDataError("iv_identify: no estimates");
  const Eigen::Index p = estimates.front().theta_tilde.size();
  const std::size_t n_total = estimates.size() + k - 1;
  if (n_total < 2 * k + static_cast<std::size_t>(p))
    throw InsufficientDataError("IV identification needs N >= 2k + p (N = " +
                                std::to_string(n_total) + ", k = " + std::to_string(k) +
                                ", p = " + std::to_string(p) + ")");
  Matrix m0 = Matrix::Zero(p, p);
  Matrix m1 = Matrix::Zero(p, p);
  for (std::size_t t = k; t + k < n_total; ++t) {
    const Vector& instrument = estimates[t - k].theta_tilde;
    m0.noalias() += estimates[t].theta_tilde * instrument.transpose();
    m1.noalias() += estimates[t + 1].theta_tilde * instrument.transpose();
  }
  double condition = 0.0;
  Matrix a_hat = solve_right(m1, m0, &condition);
  return finish(std::move(a_hat), condition, n_total - 2 * k, epsilon);
}

IdentifiedDynamics iv_identify_centered(std::span<const WindowedEstimate> estimates, std::size_t k,
                                        double epsilon) {
  if (estimates.empty()) throw InsufficientDataError("iv_identify: no estimates");
  Vector mean = Vector::Zero(estimates.front().theta_tilde.size());
  for (const WindowedEstimate& e : estimates) mean += e.theta_tilde;
  mean /= static_cast<double>(estimates.size());
  std::vector<WindowedEstimate> centered(estimates.begin(), estimates.end());
  for (WindowedEstimate& e : centered) e.theta_tilde -= mean;
  IdentifiedDynamics out = iv_identify(centered, k, epsilon);
  out.center = std::move(mean);
  return out;
}

IdentifiedDynamics ols_identify(std::span<const WindowedEstimate> estimates, double epsilon) {
  if (estimates.empty()) throw InsufficientDataError("ols_identify: no estimates");
  const Eigen::Index p = estimates.front().theta_tilde.size();
  if (estimates.size() < static_cast<std::size_t>(p) + 1)
    throw InsufficientDataError("OLS identification needs at least p + 1 estimates");
  Matrix gram = Matrix::Zero(p, p);
  Matrix cross = Matrix::Zero(p, p);
  for (std::size_t t = 0; t + 1 < estimates.size(); ++t) {
    const Vector& regressor = estimates[t].theta_tilde;
    gram.noalias() += regressor * regressor.transpose();
    cross.noalias() += estimates[t + 1].theta_tilde * regressor.transpose();
  }
  double condition = 0.0;
  Matrix a_hat = solve_right(cross, gram, &condition);
  return finish(std::move(a_hat), condition, estimates.size() - 1, epsilon);
}

IdentificationError identification_error(const Matrix& a_hat, const Matrix& a_true) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols())
    throw ArgumentError("identification_error: dimension mismatch");
  const Matrix diff = a_hat - a_true;
  return {diff.norm(), spectral_norm(diff)};
}

}  // namespace tvopt
