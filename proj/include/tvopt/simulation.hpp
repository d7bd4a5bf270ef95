#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tvopt/linalg.hpp"
#include "tvopt/problem.hpp"
#include "tvopt/rng.hpp"

namespace tvopt {

/// Discrete Lyapunov solution S = A S A^T + Q, via the vectorized system
/// (I - A (x) A) vec(S) = vec(Q). Requires rho(A) < 1.
Matrix stationary_covariance(const Matrix& a, const Matrix& q);

/// theta(t+1) = A theta(t) + w(t), w ~ N(0, Q).
///
/// Construction validates the dynamics: A square, Schur stable and
/// invertible; Q symmetric PSD; and, whenever Q != 0, a positive-definite
/// stationary covariance. Q = 0 is accepted as the noiseless limit.
class LatentDynamics {
 public:
  LatentDynamics(Matrix a, Matrix q);

  const Matrix& a() const { return a_; }
  const Matrix& q() const { return q_; }
  int p() const { return static_cast<int>(a_.rows()); }
  const Matrix& stationary_covariance() const { return sigma_; }
  // Factor F with F F^T = Q.
  const Matrix& noise_factor() const { return q_factor_; }
  double lyapunov_residual() const;

 private:
  Matrix a_;
  Matrix q_;
  Matrix sigma_;
  Matrix q_factor_;
};

/// A = U diag(lambda) U^T with U Haar-orthogonal and lambda_i uniform on
/// [eig_lo, eig_hi]; Q = sigma_p^2 I.
LatentDynamics random_stable_dynamics(int p, double eig_lo, double eig_hi, double sigma_p,
                                      SeededRng& rng);

/// T+1 states theta(0..T) starting from theta0.
std::vector<Vector> simulate_latent(const LatentDynamics& dyn, const Vector& theta0, std::size_t steps,
                                    SeededRng& rng);

/// Clamps its argument onto an admissible set; returns true when it moved.
using AdmissibleProjector = std::function<bool(Vector&)>;

struct AdmissiblePath {
  std::vector<Vector> theta;
  std::size_t clamp_count = 0;
};

inline constexpr double kMaxClampRate = 0.20;

/// theta(t) = mean + d(t), with d following the linear dynamics from a
/// stationary draw d(0) ~ N(0, Sigma). Each theta(t) is clamped onto the
/// admissible set (d itself is not altered). Throws SimulationError when more
/// than kMaxClampRate of the states needed clamping.
AdmissiblePath simulate_latent_admissible(const LatentDynamics& dyn, const Vector& mean,
                                          const AdmissibleProjector& project, std::size_t steps,
                                          SeededRng& rng);

enum class MeasurementNoise { kOn, kOff };

/// y = C(x) theta + w, w ~ N(0, R).
Vector measure_gradient(const GradientOracleModel& model, const Vector& x, const Vector& theta,
                        SeededRng& rng, MeasurementNoise noise = MeasurementNoise::kOn);

enum class ExplorationKind { kStaticGradientDescent, kRandomBox, kFixedSequence };

ExplorationKind parse_exploration_kind(std::string_view name);
std::string_view exploration_kind_name(ExplorationKind kind);

struct ExplorationPolicy {
  ExplorationKind kind = ExplorationKind::kStaticGradientDescent;
  double eta = 1e-3;
  Vector x0;
  // Sampling box for kRandomBox; safety box for every policy.
  Vector box_lo;
  Vector box_hi;
  std::vector<Vector> sequence;  // replayed cyclically
};

struct TrajectoryBundle {
  std::vector<Vector> theta;  // t = 0..T
  std::vector<Vector> x;      // t = 0..N-1
  std::vector<Vector> y;      // t = 0..N-1
  Vector offset;              // empty unless the admissible generator was used
  std::size_t clamp_count = 0;

  std::size_t collected() const { return x.size(); }
  std::size_t horizon() const { return theta.empty() ? 0 : theta.size() - 1; }
};

/// Queries the oracle at N points chosen by `policy` against the truth path
/// theta(0..N-1). Throws ExplorationDivergedError if an iterate leaves the
/// safety box by more than ten times its half-width.
TrajectoryBundle explore_collect(const GradientOracleModel& model, std::span<const Vector> truth,
                                 const ExplorationPolicy& policy, std::size_t n_collect,
                                 SeededRng& rng, MeasurementNoise noise = MeasurementNoise::kOn);

}  // namespace tvopt
