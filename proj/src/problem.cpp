#include "tvopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

void check_dims(const GradientOracleModel& model, const Vector& x, const Vector& theta,
                const char* op) {
  if (x.size() != model.n() || theta.size() != model.p()) {
    throw ArgumentError(std::string(op) + ": expected x in R^" + std::to_string(model.n()) +
                        " and theta in R^" + std::to_string(model.p()) + ", got " +
                        std::to_string(x.size()) + " and " + std::to_string(theta.size()));
  }
}

void check_x(const GradientOracleModel& model, const Vector& x) {
  if (x.size() != model.n())
    throw ArgumentError("decision point has dimension " + std::to_string(x.size()) +
                        ", expected " + std::to_string(model.n()));
}

}  // namespace

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

GradientOracleModel::GradientOracleModel(int n, int p, Matrix noise_covariance)
    : n_(n), p_(p), r_(std::move(noise_covariance)) {
  if (n <= 0 || p <= 0) throw ArgumentError("problem dimensions must be positive");
  if (r_.rows() != n || r_.cols() != n)
    throw ArgumentError("measurement covariance must be " + std::to_string(n) + "x" +
                        std::to_string(n));
  if ((r_ - r_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + r_.cwiseAbs().maxCoeff()))
    throw ArgumentError("measurement covariance must be symmetric");
  r_ = symmetrize(r_);
  if (!(min_symmetric_eigenvalue(r_) > 0.0))
    throw ArgumentError("measurement covariance must be positive definite");
}

bool GradientOracleModel::is_admissible(const Vector& theta, double mu_floor) const {
  Vector copy = theta;
  return !project_admissible(copy, mu_floor);
}

Vector GradientOracleModel::closed_form_minimizer(const Vector&) const {
  throw ArgumentError(std::string(id()) + " has no closed-form minimizer");
}

// --- quadratic tracking ---------------------------------------------------

QuadraticTrackingProblem::QuadraticTrackingProblem(Matrix noise_covariance)
    : GradientOracleModel(2, 5, std::move(noise_covariance)) {}

Eigen::Matrix2d QuadraticTrackingProblem::weight_matrix(const Vector& theta) {
  Eigen::Matrix2d h;
  h << theta(2), theta(3), theta(3), theta(4);
  return h;
}

Vector QuadraticTrackingProblem::features(const Vector& x) const {
  check_x(*this, x);
  Vector g(5);
  g << -2.0 * x(0), -2.0 * x(1), x(0) * x(0), 2.0 * x(0) * x(1), x(1) * x(1);
  return g;
}

Matrix QuadraticTrackingProblem::jacobian_t(const Vector& x) const {
  check_x(*this, x);
  Matrix c(2, 5);
  c << -2.0, 0.0, 2.0 * x(0), 2.0 * x(1), 0.0,  //
      0.0, -2.0, 0.0, 2.0 * x(0), 2.0 * x(1);
  return c;
}

Matrix QuadraticTrackingProblem::hessian(const Vector& x, const Vector& theta) const {
  check_dims(*this, x, theta, "hessian");
  return 2.0 * weight_matrix(theta);
}

bool QuadraticTrackingProblem::project_admissible(Vector& theta, double mu_floor) const {
  const Eigen::Matrix2d h = weight_matrix(theta);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  if (es.eigenvalues()(0) >= mu_floor) return false;
  const Eigen::Vector2d lifted = es.eigenvalues().cwiseMax(mu_floor);
  Eigen::Matrix2d hp = es.eigenvectors() * lifted.asDiagonal() * es.eigenvectors().transpose();
  theta(2) = hp(0, 0);
  theta(3) = 0.5 * (hp(0, 1) + hp(1, 0));
  theta(4) = hp(1, 1);
  return true;
}

Vector QuadraticTrackingProblem::closed_form_minimizer(const Vector& theta) const {
  const Eigen::Matrix2d h = weight_matrix(theta);
  const Eigen::Vector2d bt(theta(0), theta(1));
  Vector x = h.ldlt().solve(bt);
  return x;
}

// --- congestion -------------------------------------------------------------

CongestionProblem::CongestionProblem(Matrix noise_covariance)
    : GradientOracleModel(2, 1 + kFeatures, std::move(noise_covariance)) {}

const std::array<Eigen::Vector2d, CongestionProblem::kFeatures>& CongestionProblem::directions() {
  static const std::array<Eigen::Vector2d, kFeatures> dirs = [] {
    const double r = 1.0 / std::sqrt(2.0);
    return std::array<Eigen::Vector2d, kFeatures>{
        Eigen::Vector2d(1.0, 0.0),  Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(0.0, 1.0),
        Eigen::Vector2d(0.0, -1.0), Eigen::Vector2d(r, r),      Eigen::Vector2d(r, -r)};
  }();
  return dirs;
}

Vector CongestionProblem::features(const Vector& x) const {
  check_x(*this, x);
  Vector g(p());
  g(0) = 0.5 * x.squaredNorm();
  const auto& a = directions();
  for (int i = 0; i < kFeatures; ++i) g(i + 1) = softplus(a[i].dot(x) - kThreshold);
  return g;
}

Matrix CongestionProblem::jacobian_t(const Vector& x) const {
  check_x(*this, x);
  Matrix c(2, p());
  c.col(0) = x;
  const auto& a = directions();
  for (int i = 0; i < kFeatures; ++i) c.col(i + 1) = sigmoid(a[i].dot(x) - kThreshold) * a[i];
  return c;
}

Matrix CongestionProblem::hessian(const Vector& x, const Vector& theta) const {
  check_dims(*this, x, theta, "hessian");
  Matrix h = theta(0) * Matrix::Identity(2, 2);
  const auto& a = directions();
  for (int i = 0; i < kFeatures; ++i) {
    const double s = sigmoid(a[i].dot(x) - kThreshold);
    h.noalias() += theta(i + 1) * s * (1.0 - s) * (a[i] * a[i].transpose());
  }
  return symmetrize(h);
}

bool CongestionProblem::project_admissible(Vector& theta, double mu_floor) const {
  bool changed = false;
  if (theta(0) < mu_floor) {
    theta(0) = mu_floor;
    changed = true;
  }
  for (int i = 1; i < p(); ++i) {
    if (theta(i) < 0.0) {
      theta(i) = 0.0;
      changed = true;
    }
  }
  return changed;
}

// --- isotropic probe ---------------------------------------------------------

IsotropicProbeProblem::IsotropicProbeProblem(Matrix noise_covariance)
    : GradientOracleModel(3, 3, std::move(noise_covariance)) {}

Vector IsotropicProbeProblem::features(const Vector& x) const {
  check_x(*this, x);
  Vector g(3);
  g << 0.5 * x.squaredNorm(), x(0) + x(2), x(1) - x(2);
  return g;
}

Matrix IsotropicProbeProblem::jacobian_t(const Vector& x) const {
  check_x(*this, x);
  Matrix c(3, 3);
  c.col(0) = x;
  c.col(1) << 1.0, 0.0, 1.0;
  c.col(2) << 0.0, 1.0, -1.0;
  return c;
}

Matrix IsotropicProbeProblem::hessian(const Vector& x, const Vector& theta) const {
  check_dims(*this, x, theta, "hessian");
  return theta(0) * Matrix::Identity(3, 3);
}

bool IsotropicProbeProblem::project_admissible(Vector& theta, double mu_floor) const {
  if (theta(0) >= mu_floor) return false;
  theta(0) = mu_floor;
  return true;
}

Vector IsotropicProbeProblem::closed_form_minimizer(const Vector& theta) const {
  Vector x(3);
  x << theta(1), theta(2), theta(1) - theta(2);
  return -x / theta(0);
}

// --- registry ----------------------------------------------------------------

std::vector<std::string> registered_problems() {
  return {std::string(QuadraticTrackingProblem::kId), std::string(CongestionProblem::kId),
          std::string(IsotropicProbeProblem::kId)};
}

int problem_dimension_n(std::string_view id) {
  if (id == QuadraticTrackingProblem::kId || id == CongestionProblem::kId) return 2;
  if (id == IsotropicProbeProblem::kId) return 3;
  throw ArgumentError("unknown problem id '" + std::string(id) + "'");
}

int problem_dimension_p(std::string_view id) {
  if (id == QuadraticTrackingProblem::kId) return 5;
  if (id == CongestionProblem::kId) return 7;
  if (id == IsotropicProbeProblem::kId) return 3;
  throw ArgumentError("unknown problem id '" + std::string(id) + "'");
}

std::shared_ptr<const GradientOracleModel> make_problem(std::string_view id, Matrix r) {
  if (id == QuadraticTrackingProblem::kId)
    return std::make_shared<QuadraticTrackingProblem>(std::move(r));
  if (id == CongestionProblem::kId) return std::make_shared<CongestionProblem>(std::move(r));
  if (id == IsotropicProbeProblem::kId)
    return std::make_shared<IsotropicProbeProblem>(std::move(r));
  throw ArgumentError("unknown problem id '" + std::string(id) + "'");
}

std::shared_ptr<const GradientOracleModel> make_problem(std::string_view id, double sigma_m) {
  const int n = problem_dimension_n(id);
  return make_problem(id, Matrix(sigma_m * sigma_m * Matrix::Identity(n, n)));
}

// --- evaluation ---------------------------------------------------------------

double evaluate_cost(const GradientOracleModel& model, const Vector& x, const Vector& theta) {
  check_dims(model, x, theta, "evaluate_cost");
  return model.features(x).dot(theta);
}

Vector evaluate_gradient(const GradientOracleModel& model, const Vector& x, const Vector& theta) {
  check_dims(model, x, theta, "evaluate_gradient");
  return model.jacobian_t(x) * theta;
}

Matrix evaluate_hessian(const GradientOracleModel& model, const Vector& x, const Vector& theta) {
  check_dims(model, x, theta, "evaluate_hessian");
  return model.hessian(x, theta);
}

double probe_min_curvature(const GradientOracleModel& model, const StrongConvexityCertificate& cert,
                           const std::vector<Vector>& thetas, int grid_per_axis) {
  if (cert.lo.size() != model.n() || cert.hi.size() != model.n())
    throw ArgumentError("certificate region has the wrong dimension");
  if (grid_per_axis < 2) throw ArgumentError("grid_per_axis must be at least 2");
  const int n = model.n();
  long total = 1;
  for (int i = 0; i < n; ++i) total *= grid_per_axis;
  double lowest = std::numeric_limits<double>::infinity();
  Vector x(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = 0; i < n; ++i) {
      const double frac = static_cast<double>(rem % grid_per_axis) / (grid_per_axis - 1);
      rem /= grid_per_axis;
      x(i) = cert.lo(i) + frac * (cert.hi(i) - cert.lo(i));
    }
    for (const auto& theta : thetas)
      lowest = std::min(lowest, min_symmetric_eigenvalue(evaluate_hessian(model, x, theta)));
  }
  return lowest;
}

}  // namespace tvopt
