#pragma once

#include <cstddef>
#include <vector>

#include "tvopt/linalg.hpp"
#include "tvopt/problem.hpp"
#include "tvopt/simulation.hpp"

namespace tvopt {

/// k consecutive measurements stacked as y_bar = C_bar theta(t) + noise.
struct StackedWindow {
  std::size_t t = 0;
  Vector y_bar;  // kn
  Matrix c_bar;  // kn x p
  Matrix r_bar;  // kn x kn, block diagonal I_k (x) R
};

struct WindowedEstimate {
  std::size_t t = 0;
  Vector theta_tilde;
  Matrix sigma_eta;           // (C_bar^T R_bar^-1 C_bar)^-1
  double alpha_k = 0.0;       // lambda_min(C_bar^T R_bar^-1 C_bar)
  double gram_max = 0.0;      // lambda_max of the same Gram matrix

  // Excitation threshold: lambda_min > 1e-8 lambda_max.
  bool excited() const { return alpha_k > 1e-8 * gram_max; }
};

enum class GaussMarkovMethod {
  kWhitenedQr,  // QR of R_bar^{-1/2} C_bar (default)
  kCholesky,    // Cholesky of the Gram matrix
};

inline constexpr double kMaxGramCondition = 1e12;

/// Throws ArgumentError when t + k > N or kn < p, and ExcitationError when
/// C_bar is rank deficient (sigma_min <= 1e-10 sigma_max).
StackedWindow build_window(const TrajectoryBundle& bundle, const GradientOracleModel& model,
                           std::size_t t, std::size_t k);

/// Weighted least squares / BLUE for one window. The gain K* is never formed
/// explicitly. Throws IllConditionedError if cond(Gram) > kMaxGramCondition.
WindowedEstimate gauss_markov_estimate(const StackedWindow& window,
                                       GaussMarkovMethod method = GaussMarkovMethod::kWhitenedQr);

/// || K* C_bar - I_p ||_F through the estimator's own factorization.
double gauss_markov_gain_check(const StackedWindow& window,
                               GaussMarkovMethod method = GaussMarkovMethod::kWhitenedQr);

struct EstimateSeries {
  std::vector<WindowedEstimate> estimates;  // t = 0..N-k
  double min_alpha_k = 0.0;
  std::size_t window = 0;  // k
};

/// All N-k+1 windows in time order. Fails on the first bad window; the
/// error message names its start index.
EstimateSeries estimate_all(const TrajectoryBundle& bundle, const GradientOracleModel& model,
                            std::size_t k, GaussMarkovMethod method = GaussMarkovMethod::kWhitenedQr);

}  // namespace tvopt
