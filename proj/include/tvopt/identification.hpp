#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "tvopt/estimation.hpp"
#include "tvopt/linalg.hpp"

namespace tvopt {

inline constexpr double kDefaultStabilizationEpsilon = 1e-3;
inline constexpr double kMaxMomentCondition = 1e12;

struct IdentifiedDynamics {
  Matrix a_hat;              // raw estimate, used for identification-error metrics
  Matrix a_forecast;         // a_hat, or its stabilized version when clipped
  double m0_condition = 0.0; // cond of the sample moment used in the solve
  double spectral_radius = 0.0;  // rho(a_hat)
  bool clipped = false;
  std::size_t sample_count = 0;
  Vector center;             // sample mean removed before the fit; empty if none
};

/// Returns (A, false) when rho(A) < 1, else (A (1 - epsilon) / rho(A), true).
std::pair<Matrix, bool> stabilize(const Matrix& a_hat, double epsilon);

/// Lag-k instrumental-variable estimate
///   A = [sum theta(t+1) theta(t-k)^T] [sum theta(t) theta(t-k)^T]^-1,
/// summed over t = k..N-k-1 with N = estimates.size() + k - 1. Only sequence
/// positions are used, never the estimates' own time stamps.
///
/// Throws InsufficientDataError when N < 2k + p and IllConditionedError when
/// cond(M0) > 1e12.
IdentifiedDynamics iv_identify(std::span<const WindowedEstimate> estimates, std::size_t k,
                               double epsilon = kDefaultStabilizationEpsilon);

/// iv_identify on theta~ - m, where m is the sample mean of the whole
/// sequence. Used when the latent path fluctuates around a nonzero mean, in
/// which case the raw moments are dominated by m m^T. The mean is stored in
/// `center` and forecasts revert to it.
IdentifiedDynamics iv_identify_centered(std::span<const WindowedEstimate> estimates, std::size_t k,
                                        double epsilon = kDefaultStabilizationEpsilon);

/// Least-squares regression of theta(t+1) on theta(t) over every consecutive
/// pair. Biased by the shared reconstruction noise; kept as a baseline.
IdentifiedDynamics ols_identify(std::span<const WindowedEstimate> estimates,
                                double epsilon = kDefaultStabilizationEpsilon);

struct IdentificationError {
  double frobenius = 0.0;
  double spectral = 0.0;
};

IdentificationError identification_error(const Matrix& a_hat, const Matrix& a_true);

}  // namespace tvopt
