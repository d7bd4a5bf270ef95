#include "tvopt/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

double prediction_floor(const LatentDynamics& dyn, std::size_t horizon) {
  Matrix s = Matrix::Zero(dyn.p(), dyn.p());
  for (std::size_t i = 0; i < horizon; ++i) s = dyn.a() * s * dyn.a().transpose() + dyn.q();
  return std::sqrt(std::max(s.trace(), 0.0));
}

double anchor_decay(const LatentDynamics& dyn, std::size_t horizon) {
  return spectral_norm(matrix_power(dyn.a(), static_cast<unsigned>(horizon)));
}

double noise_term(std::span<const WindowedEstimate> estimates) {
  if (estimates.empty()) throw ArgumentError("noise_term: empty estimate sequence");
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto& e : estimates) alpha = std::min(alpha, e.alpha_k);
  const auto p = static_cast<double>(estimates.front().theta_tilde.size());
  return std::sqrt(p / alpha);
}

std::vector<BoundComponents> bound_components(const LatentDynamics& dyn,
                                              std::span<const WindowedEstimate> estimates,
                                              std::size_t max_horizon) {
  const double noise = noise_term(estimates);
  const double limit = std::sqrt(dyn.stationary_covariance().trace());
  std::vector<BoundComponents> rows;
  rows.reserve(max_horizon + 1);
  Matrix s = Matrix::Zero(dyn.p(), dyn.p());
  Matrix power = Matrix::Identity(dyn.p(), dyn.p());
  for (std::size_t h = 0; h <= max_horizon; ++h) {
    rows.push_back({h, noise, spectral_norm(power), std::sqrt(std::max(s.trace(), 0.0)), limit});
    s = dyn.a() * s * dyn.a().transpose() + dyn.q();
    power = dyn.a() * power;
  }
  return rows;
}

}  // namespace tvopt
