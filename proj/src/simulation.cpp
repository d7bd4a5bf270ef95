#include "tvopt/simulation.hpp"

#include <cmath>
#include <string>

#include "tvopt/errors.hpp"

namespace tvopt {

Matrix stationary_covariance(const Matrix& a, const Matrix& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols())
    throw ArgumentError("stationary_covariance: A and Q must be square of equal size");
  const double rho = spectral_radius(a);
  if (!(rho < 1.0))
    throw UnstableDynamicsError("stationary covariance requires rho(A) < 1, got " +
                                std::to_string(rho));
  const Eigen::Index p = a.rows();
  // vec is column-major: vec(A S A^T) = (A (x) A) vec(S).
  Matrix kron(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) kron.block(i * p, j * p, p, p) = a(i, j) * a;
  const Matrix system = Matrix::Identity(p * p, p * p) - kron;
  const Vector rhs = Eigen::Map<const Vector>(q.data(), p * p);
  const Vector sol = system.partialPivLu().solve(rhs);
  Matrix sigma = Eigen::Map<const Matrix>(sol.data(), p, p);
  return symmetrize(sigma);
}

LatentDynamics::LatentDynamics(Matrix a, Matrix q) : a_(std::move(a)), q_(std::move(q)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0)
    throw ArgumentError("transition matrix must be square and nonempty");
  if (q_.rows() != a_.rows() || q_.cols() != a_.cols())
    throw ArgumentError("process covariance must match the transition matrix");
  const double rho = spectral_radius(a_);
  if (!(rho < 1.0))
    throw UnstableDynamicsError("transition matrix is not Schur stable (rho = " +
                                std::to_string(rho) + ")");
  if (!(std::abs(a_.determinant()) > 1e-12))
    throw UnstableDynamicsError("transition matrix must be invertible");
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + q_.cwiseAbs().maxCoeff()))
    throw ArgumentError("process covariance must be symmetric");
  q_ = symmetrize(q_);
  if (min_symmetric_eigenvalue(q_) < -1e-12)
    throw ArgumentError("process covariance must be positive semidefinite");
  sigma_ = tvopt::stationary_covariance(a_, q_);
  if (!q_.isZero(0.0) && !(min_symmetric_eigenvalue(sigma_) > 0.0))
    throw UnstableDynamicsError("stationary covariance is singular; (A, Q^1/2) not controllable");
  q_factor_ = psd_factor(q_);
}

double LatentDynamics::lyapunov_residual() const {
  return (sigma_ - a_ * sigma_ * a_.transpose() - q_).norm();
}

LatentDynamics random_stable_dynamics(int p, double eig_lo, double eig_hi, double sigma_p,
                                      SeededRng& rng) {
  if (p <= 0) throw ArgumentError("dimension must be positive");
  if (!(0.0 < eig_lo && eig_lo <= eig_hi && eig_hi < 1.0))
    throw ArgumentError("eigenvalue range must satisfy 0 < lo <= hi < 1");
  Matrix g(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix u = qr.householderQ() * Matrix::Identity(p, p);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign convention diag(R) > 0 makes U Haar distributed.
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) u.col(j) = -u.col(j);
  Vector lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = rng.uniform(eig_lo, eig_hi);
  Matrix a = u * lambda.asDiagonal() * u.transpose();
  return LatentDynamics(std::move(a), sigma_p * sigma_p * Matrix::Identity(p, p));
}

std::vector<Vector> simulate_latent(const LatentDynamics& dyn, const Vector& theta0, std::size_t steps,
                                    SeededRng& rng) {
  if (theta0.size() != dyn.p()) throw ArgumentError("initial state has the wrong dimension");
  std::vector<Vector> path;
  path.reserve(steps + 1);
  path.push_back(theta0);
  for (std::size_t t = 0; t < steps; ++t) {
    Vector next = dyn.a() * path.back();
    next += rng.gaussian(dyn.noise_factor());
    path.push_back(std::move(next));
  }
  return path;
}

AdmissiblePath simulate_latent_admissible(const LatentDynamics& dyn, const Vector& mean,
                                          const AdmissibleProjector& project, std::size_t steps,
                                          SeededRng& rng) {
  if (mean.size() != dyn.p()) throw ArgumentError("mean has the wrong dimension");
  {
    Vector check = mean;
    if (project(check)) throw ArgumentError("mean parameter is not admissible");
  }
  const Vector d0 = rng.gaussian(psd_factor(dyn.stationary_covariance()));
  std::vector<Vector> deviation = simulate_latent(dyn, d0, steps, rng);
  AdmissiblePath out;
  out.theta.reserve(deviation.size());
  for (auto& d : deviation) {
    Vector theta = mean + d;
    if (project(theta)) ++out.clamp_count;
    out.theta.push_back(std::move(theta));
  }
  const double rate = static_cast<double>(out.clamp_count) / static_cast<double>(out.theta.size());
  if (rate > kMaxClampRate)
    throw SimulationError("admissibility clamping fired on " + std::to_string(out.clamp_count) +
                          " of " + std::to_string(out.theta.size()) +
                          " steps; process noise too large for the configured mean");
  return out;
}

Vector measure_gradient(const GradientOracleModel& model, const Vector& x, const Vector& theta,
                        SeededRng& rng, MeasurementNoise noise) {
  Vector y = evaluate_gradient(model, x, theta);
  if (noise == MeasurementNoise::kOn) {
    Eigen::LLT<Matrix> llt(model.noise_covariance());
    y += llt.matrixL() * rng.normal_vector(model.n());
  }
  return y;
}

ExplorationKind parse_exploration_kind(std::string_view name) {
  if (name == "static-gd") return ExplorationKind::kStaticGradientDescent;
  if (name == "random-box") return ExplorationKind::kRandomBox;
  if (name == "fixed-sequence") return ExplorationKind::kFixedSequence;
  throw ArgumentError("unknown exploration policy '" + std::string(name) + "'");
}

std::string_view exploration_kind_name(ExplorationKind kind) {
  switch (kind) {
    case ExplorationKind::kStaticGradientDescent:
      return "static-gd";
    case ExplorationKind::kRandomBox:
      return "random-box";
    case ExplorationKind::kFixedSequence:
      return "fixed-sequence";
  }
  return "unknown";
}

TrajectoryBundle explore_collect(const GradientOracleModel& model, std::span<const Vector> truth,
                                 const ExplorationPolicy& policy, std::size_t n_collect,
                                 SeededRng& rng, MeasurementNoise noise) {
  if (n_collect == 0) throw ArgumentError("explore_collect: need at least one measurement");
  if (truth.size() < n_collect)
    throw ArgumentError("explore_collect: truth path shorter than the collection horizon");
  const int n = model.n();
  if (policy.box_lo.size() != n || policy.box_hi.size() != n)
    throw ArgumentError("explore_collect: safety box has the wrong dimension");
  if ((policy.box_hi - policy.box_lo).minCoeff() <= 0.0)
    throw ArgumentError("explore_collect: safety box must have positive width");
  const Vector center = 0.5 * (policy.box_lo + policy.box_hi);
  const Vector radius = 0.5 * (policy.box_hi - policy.box_lo);

  TrajectoryBundle bundle;
  bundle.x.reserve(n_collect);
  bundle.y.reserve(n_collect);

  Vector x;
  switch (policy.kind) {
    case ExplorationKind::kStaticGradientDescent:
      if (policy.x0.size() != n) throw ArgumentError("static-gd needs x0 in R^n");
      x = policy.x0;
      break;
    case ExplorationKind::kFixedSequence:
      if (policy.sequence.empty()) throw ArgumentError("fixed-sequence policy has no points");
      break;
    case ExplorationKind::kRandomBox:
      break;
  }

  for (std::size_t t = 0; t < n_collect; ++t) {
    if (policy.kind == ExplorationKind::kRandomBox) {
      x.resize(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(policy.box_lo(i), policy.box_hi(i));
    } else if (policy.kind == ExplorationKind::kFixedSequence) {
      x = policy.sequence[t % policy.sequence.size()];
      if (x.size() != n) throw ArgumentError("fixed-sequence point has the wrong dimension");
    }
    const Vector outside = ((x - center).cwiseAbs() - radius).cwiseMax(0.0);
    if (!x.allFinite() || (outside.array() > 10.0 * radius.array()).any())
      throw ExplorationDivergedError("exploration left the safety box at t = " + std::to_string(t),
                                     t);
    Vector y = measure_gradient(model, x, truth[t], rng, noise);
    bundle.x.push_back(x);
    bundle.y.push_back(y);
    if (policy.kind == ExplorationKind::kStaticGradientDescent) x = x - policy.eta * y;
  }
  return bundle;
}

}  // namespace tvopt
