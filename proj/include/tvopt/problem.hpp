#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tvopt/linalg.hpp"

namespace tvopt {

/// A parametric cost family f(x, theta) = g(x)^T theta observed through a
/// noisy gradient oracle y = C(x) theta + w, w ~ N(0, R), with
/// C(x) = d g^T / d x (n x p).
///
/// Implementations are stateless after construction and safe to share
/// between threads.
class GradientOracleModel {
 public:
  virtual ~GradientOracleModel() = default;

  virtual std::string_view id() const = 0;
  int n() const { return n_; }
  int p() const { return p_; }
  const Matrix& noise_covariance() const { return r_; }

  /// Feature map g(x) in R^p.
  virtual Vector features(const Vector& x) const = 0;
  /// C(x) in R^{n x p}.
  virtual Matrix jacobian_t(const Vector& x) const = 0;
  /// Hessian of f(., theta) at x. Always exactly symmetric.
  virtual Matrix hessian(const Vector& x, const Vector& theta) const = 0;

  /// Moves theta onto the admissible set for modulus `mu_floor` in place.
  /// Returns true when theta had to change.
  virtual bool project_admissible(Vector& theta, double mu_floor) const = 0;
  bool is_admissible(const Vector& theta, double mu_floor) const;

  /// Minimizer of f(., theta) in closed form, when the family has one.
  /// theta must already be admissible.
  virtual bool has_closed_form() const { return false; }
  virtual Vector closed_form_minimizer(const Vector& theta) const;

 protected:
  GradientOracleModel(int n, int p, Matrix noise_covariance);

 private:
  int n_;
  int p_;
  Matrix r_;
};

/// Robot/UAV tracking: f = (x-b)^T H (x-b) rewritten with
/// g(x) = (-2x1, -2x2, x1^2, 2x1x2, x2^2), theta = (bt1, bt2, h11, h12, h22),
/// bt = H b. The constant b^T H b is dropped; it has no gradient.
class QuadraticTrackingProblem final : public GradientOracleModel {
 public:
  static constexpr std::string_view kId = "quadratic-tracking";
  explicit QuadraticTrackingProblem(Matrix noise_covariance);

  std::string_view id() const override { return kId; }
  Vector features(const Vector& x) const override;
  Matrix jacobian_t(const Vector& x) const override;
  Matrix hessian(const Vector& x, const Vector& theta) const override;
  // Raises eigenvalues of H(theta) below mu_floor to mu_floor.
  bool project_admissible(Vector& theta, double mu_floor) const override;
  bool has_closed_form() const override { return true; }
  Vector closed_form_minimizer(const Vector& theta) const override;

  static Eigen::Matrix2d weight_matrix(const Vector& theta);
};

/// Road-congestion cost: theta0 |x|^2 / 2 + sum_i theta_i softplus(a_i^T x - d_i)
/// over six corridor directions.
class CongestionProblem final : public GradientOracleModel {
 public:
  static constexpr std::string_view kId = "congestion";
  static constexpr int kFeatures = 6;
  static constexpr double kThreshold = 0.5;

  explicit CongestionProblem(Matrix noise_covariance);

  std::string_view id() const override { return kId; }
  Vector features(const Vector& x) const override;
  Matrix jacobian_t(const Vector& x) const override;
  Matrix hessian(const Vector& x, const Vector& theta) const override;
  // theta0 >= mu_floor, theta_i >= 0.
  bool project_admissible(Vector& theta, double mu_floor) const override;

  static const std::array<Eigen::Vector2d, kFeatures>& directions();
};

/// Three-dimensional synthetic family with n = p = 3:
/// g(x) = (|x|^2 / 2, x1 + x3, x2 - x3). C(x) = [x, u, v] is square and
/// invertible off the plane -x1 + x2 + x3 = 0, so a single measurement
/// determines theta (window length 1).
class IsotropicProbeProblem final : public GradientOracleModel {
 public:
  static constexpr std::string_view kId = "isotropic-3d";
  explicit IsotropicProbeProblem(Matrix noise_covariance);

  std::string_view id() const override { return kId; }
  Vector features(const Vector& x) const override;
  Matrix jacobian_t(const Vector& x) const override;
  Matrix hessian(const Vector& x, const Vector& theta) const override;
  bool project_admissible(Vector& theta, double mu_floor) const override;
  bool has_closed_form() const override { return true; }
  Vector closed_form_minimizer(const Vector& theta) const override;
};

/// Problem identifiers accepted by make_problem.
std::vector<std::string> registered_problems();
int problem_dimension_n(std::string_view id);
int problem_dimension_p(std::string_view id);
std::shared_ptr<const GradientOracleModel> make_problem(std::string_view id, double sigma_m);
std::shared_ptr<const GradientOracleModel> make_problem(std::string_view id, Matrix noise_covariance);

// Overflow-safe softplus log(1 + e^z) and the logistic function.
double softplus(double z);
double sigmoid(double z);

double evaluate_cost(const GradientOracleModel& model, const Vector& x, const Vector& theta);
/// Noise-free gradient C(x) theta.
Vector evaluate_gradient(const GradientOracleModel& model, const Vector& x, const Vector& theta);
Matrix evaluate_hessian(const GradientOracleModel& model, const Vector& x, const Vector& theta);

/// Claim that lambda_min(hess f) >= mu on the box [lo, hi].
struct StrongConvexityCertificate {
  double mu = 0.0;
  Vector lo;
  Vector hi;
};

/// Smallest Hessian eigenvalue over a `grid_per_axis`^n grid of the
/// certificate's region, for each of the given parameter vectors.
double probe_min_curvature(const GradientOracleModel& model, const StrongConvexityCertificate& cert,
                           const std::vector<Vector>& thetas, int grid_per_axis);

}  // namespace tvopt
