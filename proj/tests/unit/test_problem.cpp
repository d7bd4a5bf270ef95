#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/problem.hpp"
#include "tvopt/rng.hpp"

using namespace tvopt;
using namespace tvopt::testing;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

std::vector<std::shared_ptr<const GradientOracleModel>> all_models() {
  std::vector<std::shared_ptr<const GradientOracleModel>> out;
  for (const auto& id : registered_problems()) out.push_back(make_problem(id, 0.5));
  return out;
}

Vector random_theta(const GradientOracleModel& model, SeededRng& rng) {
  if (model.id() == CongestionProblem::kId) return congestion_theta(rng);
  Vector theta = uniform_vector(rng, model.p(), -2.0, 2.0);
  if (model.id() == IsotropicProbeProblem::kId) theta(0) = rng.uniform(0.5, 2.0);
  return theta;
}

}  // namespace

TEST_CASE("cost examples") {
  auto quad = make_problem("quadratic-tracking", 1.0);
  auto cong = make_problem("congestion", 1.0);
  CHECK(evaluate_cost(*quad, vec({1, 1}), vec({0, 0, 1, 0, 1})) == doctest::Approx(2.0));
  CHECK(evaluate_cost(*cong, vec({3, 4}), vec({1, 0, 0, 0, 0, 0, 0})) == doctest::Approx(12.5));
  CHECK(evaluate_cost(*cong, vec({0.5, 0}), vec({0, 1, 0, 0, 0, 0, 0})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("gradient examples") {
  auto quad = make_problem("quadratic-tracking", 1.0);
  const Vector g = evaluate_gradient(*quad, vec({1, 2}), vec({0, 0, 1, 0, 1}));
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(4.0));
  for (const auto& model : all_models()) {
    const Vector zero = evaluate_gradient(*model, Vector::Ones(model->n()), Vector::Zero(model->p()));
    CHECK(zero.norm() == 0.0);
  }
}

TEST_CASE("quadratic C(x) rows") {
  QuadraticTrackingProblem quad(Matrix::Identity(2, 2));
  const Matrix c = quad.jacobian_t(vec({0.3, -1.7}));
  const Matrix expected = (Matrix(2, 5) << -2, 0, 0.6, -3.4, 0, 0, -2, 0, 0.6, -3.4).finished();
  CHECK((c - expected).norm() == 0.0);
}

TEST_CASE("hessian examples") {
  auto quad = make_problem("quadratic-tracking", 1.0);
  auto cong = make_problem("congestion", 1.0);
  const Matrix hq = evaluate_hessian(*quad, vec({5, -1}), vec({9, 9, 1, 0, 1}));
  CHECK((hq - 2.0 * Matrix::Identity(2, 2)).norm() == 0.0);
  const Matrix hc = evaluate_hessian(*cong, vec({0.2, 0.7}), vec({1, 0, 0, 0, 0, 0, 0}));
  CHECK((hc - Matrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("C(x) matches the finite-difference Jacobian of g") {
  SeededRng rng(11, 0);
  for (const auto& model : all_models()) {
    CAPTURE(model->id());
    for (int rep = 0; rep < 100; ++rep) {
      const Vector x = uniform_vector(rng, model->n(), -3.0, 3.0);
      const Matrix fd = fd_jacobian([&](const Vector& z) { return model->features(z); }, x);
      const Matrix c = model->jacobian_t(x);
      CHECK((fd.transpose() - c).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("gradient matches finite differences of the cost") {
  SeededRng rng(12, 0);
  for (const auto& model : all_models()) {
    CAPTURE(model->id());
    for (int rep = 0; rep < 100; ++rep) {
      const Vector x = uniform_vector(rng, model->n(), -3.0, 3.0);
      const Vector theta = random_theta(*model, rng);
      const Vector fd = fd_gradient([&](const Vector& z) { return evaluate_cost(*model, z, theta); }, x);
      CHECK((fd - evaluate_gradient(*model, x, theta)).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("hessian matches finite differences of the gradient and is symmetric") {
  SeededRng rng(13, 0);
  for (const auto& model : all_models()) {
    CAPTURE(model->id());
    for (int rep = 0; rep < 100; ++rep) {
      const Vector x = uniform_vector(rng, model->n(), -3.0, 3.0);
      const Vector theta = random_theta(*model, rng);
      const Matrix fd =
          fd_jacobian([&](const Vector& z) { return evaluate_gradient(*model, z, theta); }, x);
      const Matrix h = evaluate_hessian(*model, x, theta);
      CHECK((fd - h).cwiseAbs().maxCoeff() <= 1e-4);
      CHECK((h - h.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("congestion strong convexity certificate") {
  auto cong = make_problem("congestion", 1.0);
  SeededRng rng(14, 0);
  const double mu = 0.3;
  std::vector<Vector> thetas;
  for (int i = 0; i < 20; ++i) {
    Vector theta = congestion_theta(rng, mu);
    theta(0) = mu + rng.uniform(0.0, 0.1);
    thetas.push_back(theta);
  }
  const StrongConvexityCertificate cert{mu, vec({-4, -4}), vec({4, 4})};
  CHECK(probe_min_curvature(*cong, cert, thetas, 21) >= cert.mu - 1e-8);
}

TEST_CASE("softplus guard branches") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(40.0) == 40.0);
  CHECK(softplus(-40.0) == std::exp(-40.0));
  CHECK(softplus(800.0) == 800.0);
  CHECK(std::isfinite(softplus(-800.0)));
  // Either side of the guard the two formulas agree to double resolution.
  CHECK(softplus(30.0) == doctest::Approx(30.0 + std::log1p(std::exp(-30.0))).epsilon(1e-15));
  CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigmoid(-800.0) >= 0.0);
}

TEST_CASE("closed-form minimizers zero the gradient") {
  SeededRng rng(15, 0);
  auto quad = make_problem("quadratic-tracking", 1.0);
  auto iso = make_problem("isotropic-3d", 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Vector tq = uniform_vector(rng, 5, -2.0, 2.0);
    tq(2) = rng.uniform(1.0, 3.0);
    tq(4) = rng.uniform(1.0, 3.0);
    tq(3) = rng.uniform(-0.5, 0.5);
    CHECK(evaluate_gradient(*quad, quad->closed_form_minimizer(tq), tq).norm() <= 1e-12);
    Vector ti = uniform_vector(rng, 3, -2.0, 2.0);
    ti(0) = rng.uniform(0.5, 2.0);
    CHECK(evaluate_gradient(*iso, iso->closed_form_minimizer(ti), ti).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(make_problem("congestion", 1.0)->closed_form_minimizer(Vector::Ones(7)),
                  ArgumentError);
}

TEST_CASE("admissible projection") {
  QuadraticTrackingProblem quad(Matrix::Identity(2, 2));
  Vector theta = vec({1, 1, 1, 2, 1});  // H eigenvalues 3 and -1
  CHECK(quad.project_admissible(theta, 1e-3));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(QuadraticTrackingProblem::weight_matrix(theta));
  CHECK(es.eigenvalues()(0) == doctest::Approx(1e-3));
  CHECK(es.eigenvalues()(1) == doctest::Approx(3.0));
  CHECK(quad.is_admissible(theta, 1e-3 - 1e-12));
  Vector good = vec({1, 1, 2, 0, 2});
  CHECK_FALSE(quad.project_admissible(good, 1e-3));

  CongestionProblem cong(Matrix::Identity(2, 2));
  Vector tc = vec({-1, 0.5, -0.2, 1, 0, -3, 2});
  CHECK(cong.project_admissible(tc, 0.1));
  CHECK(tc == vec({0.1, 0.5, 0, 1, 0, 0, 2}));
}

TEST_CASE("registry and argument checks") {
  CHECK(registered_problems().size() == 3);
  CHECK(problem_dimension_n("congestion") == 2);
  CHECK(problem_dimension_p("congestion") == 7);
  CHECK(problem_dimension_p("quadratic-tracking") == 5);
  CHECK(problem_dimension_p("isotropic-3d") == 3);
  CHECK_THROWS_AS(make_problem("nope", 1.0), ArgumentError);
  CHECK_THROWS_AS(make_problem("congestion", (Matrix(2, 2) << 1, 0.5, 0, 1).finished()),
                  ArgumentError);
  CHECK_THROWS_AS(make_problem("congestion", (Matrix(2, 2) << 1, 0, 0, -1).finished()),
                  ArgumentError);
  CHECK_THROWS_AS(make_problem("congestion", Matrix::Identity(3, 3)), ArgumentError);
  auto cong = make_problem("congestion", 1.0);
  CHECK_THROWS_AS(evaluate_cost(*cong, Vector::Zero(3), Vector::Zero(7)), ArgumentError);
  CHECK_THROWS_AS(evaluate_gradient(*cong, Vector::Zero(2), Vector::Zero(5)), ArgumentError);
  CHECK_THROWS_AS(evaluate_hessian(*cong, Vector::Zero(2), Vector::Zero(6)), ArgumentError);
}
