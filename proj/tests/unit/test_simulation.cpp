#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/simulation.hpp"

using namespace tvopt;
using namespace tvopt::testing;

namespace {

Matrix random_psd(SeededRng& rng, int p) {
  Matrix g(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  return g * g.transpose() / p;
}

}  // namespace

TEST_CASE("stationary covariance examples") {
  const Matrix s0 = stationary_covariance(Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  CHECK((s0 - Matrix::Identity(3, 3)).norm() <= 1e-15);
  const Matrix s1 = stationary_covariance(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.75));
  CHECK(s1(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(stationary_covariance(Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                  UnstableDynamicsError);
}

TEST_CASE("stationary covariance matches the truncated series") {
  SeededRng rng(21, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 2 + rep % 6;
    // Spectral radius <= 0.9 keeps the 200-term tail below 1e-17.
    const LatentDynamics base = random_stable_dynamics(p, 0.05, 0.9, 1.0, rng);
    const Matrix q = random_psd(rng, p);
    const Matrix sigma = stationary_covariance(base.a(), q);
    const Matrix oracle = truncated_lyapunov(base.a(), q, 201);
    CHECK((sigma - oracle).norm() <= 1e-8);
    CHECK((sigma - base.a() * sigma * base.a().transpose() - q).norm() <= 1e-10 * (1.0 + q.norm()));
  }
}

TEST_CASE("latent dynamics validation") {
  CHECK_THROWS_AS(LatentDynamics(Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                  UnstableDynamicsError);
  CHECK_THROWS_AS(LatentDynamics(Matrix::Zero(2, 2), Matrix::Identity(2, 2)), UnstableDynamicsError);
  CHECK_THROWS_AS(LatentDynamics(0.5 * Matrix::Identity(2, 2), -Matrix::Identity(2, 2)),
                  ArgumentError);
  CHECK_THROWS_AS(LatentDynamics(0.5 * Matrix::Identity(2, 2), (Matrix(2, 2) << 1, 1, 0, 1).finished()),
                  ArgumentError);
  CHECK_THROWS_AS(LatentDynamics(0.5 * Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                  ArgumentError);
  // Q = 0 is the noiseless limit.
  const LatentDynamics frozen(0.5 * Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  CHECK(frozen.stationary_covariance().norm() == 0.0);
  // Noise confined to one coordinate of a diagonal A never reaches the other.
  CHECK_THROWS_AS(LatentDynamics(0.5 * Matrix::Identity(2, 2), (Matrix(2, 2) << 1, 0, 0, 0).finished()),
                  UnstableDynamicsError);
}

TEST_CASE("random stable dynamics respects the eigenvalue range") {
  SeededRng rng(22, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const LatentDynamics dyn = random_stable_dynamics(7, 0.9, 0.99, 0.1, rng);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(dyn.a());
    CHECK((dyn.a() - dyn.a().transpose()).norm() <= 1e-14);
    CHECK(es.eigenvalues().minCoeff() >= 0.9 - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= 0.99 + 1e-12);
    CHECK((dyn.q() - 0.01 * Matrix::Identity(7, 7)).norm() <= 1e-15);
    CHECK(dyn.lyapunov_residual() <= 1e-10 * (1.0 + dyn.q().norm()));
  }
}

TEST_CASE("noiseless simulation is the matrix-power recursion") {
  SeededRng rng(23, 0);
  const LatentDynamics base = random_stable_dynamics(4, 0.5, 0.99, 1.0, rng);
  const LatentDynamics dyn(base.a(), Matrix::Zero(4, 4));
  const Vector theta0 = rng.normal_vector(4);
  const auto path = simulate_latent(dyn, theta0, 100, rng);
  REQUIRE(path.size() == 101);
  for (unsigned t = 0; t <= 100; ++t) {
    const Vector expected = matrix_power(dyn.a(), t) * theta0;
    CHECK((path[t] - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("white and stationary sample covariances") {
  SeededRng rng(24, 0);
  const LatentDynamics white(Matrix::Zero(3, 3) + 1e-3 * Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  auto path = simulate_latent(white, Vector::Zero(3), 100000, rng);
  path.erase(path.begin());
  const Matrix cov_w = sample_covariance(path);
  CHECK((cov_w - white.stationary_covariance()).norm() <= 0.05 * white.stationary_covariance().norm());

  const LatentDynamics dyn = random_stable_dynamics(3, 0.3, 0.7, 0.5, rng);
  const Vector theta0 = rng.gaussian(psd_factor(dyn.stationary_covariance()));
  const auto stat = simulate_latent(dyn, theta0, 100000, rng);
  const Matrix cov_s = sample_covariance(stat);
  CHECK((cov_s - dyn.stationary_covariance()).norm() <= 0.05 * dyn.stationary_covariance().norm());
}

TEST_CASE("admissible path: frozen, pass-through and clamping") {
  SeededRng rng(25, 0);
  const Vector mean = Vector::Constant(3, 2.0);
  const LatentDynamics frozen(0.5 * Matrix::Identity(3, 3), Matrix::Zero(3, 3));
  const AdmissiblePath still =
      simulate_latent_admissible(frozen, mean, [](Vector&) { return false; }, 50, rng);
  CHECK(still.clamp_count == 0);
  for (const auto& theta : still.theta) CHECK((theta - mean).norm() == 0.0);

  const LatentDynamics dyn = random_stable_dynamics(3, 0.5, 0.9, 0.3, rng);
  SeededRng a(99, 1), b(99, 1);
  const AdmissiblePath passed =
      simulate_latent_admissible(dyn, mean, [](Vector&) { return false; }, 40, a);
  const Vector d0 = b.gaussian(psd_factor(dyn.stationary_covariance()));
  const auto reference = simulate_latent(dyn, d0, 40, b);
  for (std::size_t t = 0; t < reference.size(); ++t)
    CHECK((passed.theta[t] - (mean + reference[t])).norm() == 0.0);

  const auto nonneg = [](Vector& v) {
    const bool moved = (v.array() < 0.0).any();
    v = v.cwiseMax(0.0);
    return moved;
  };
  const AdmissiblePath clamped = simulate_latent_admissible(dyn, mean, nonneg, 200, rng);
  for (const auto& theta : clamped.theta) CHECK(theta.minCoeff() >= 0.0);
  CHECK_THROWS_AS(simulate_latent_admissible(dyn, Vector::Constant(3, 0.01), nonneg, 200, rng),
                  SimulationError);
  CHECK_THROWS_AS(simulate_latent_admissible(dyn, Vector::Constant(3, -1.0), nonneg, 10, rng),
                  ArgumentError);
}

TEST_CASE("congestion clamp rate around the shipped mean") {
  // Shipped mean of 3 per component, sigma_p = 0.1, eigenvalues in [0.90, 0.99].
  SeededRng rng(26, 0);
  const auto model = make_problem("congestion", 0.5);
  const auto project = [&](Vector& v) { return model->project_admissible(v, 1e-3); };
  std::size_t clamps = 0, steps = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const LatentDynamics dyn = random_stable_dynamics(7, 0.9, 0.99, 0.1, rng);
    const AdmissiblePath path = simulate_latent_admissible(dyn, Vector::Constant(7, 3.0), project, 200, rng);
    clamps += path.clamp_count;
    steps += path.theta.size();
  }
  CHECK(static_cast<double>(clamps) / static_cast<double>(steps) < 0.05);
}

TEST_CASE("gradient measurements") {
  const auto quad = make_problem("quadratic-tracking", 0.7);
  SeededRng rng(27, 0);
  Vector theta(5);
  theta << 0, 0, 1, 0, 1;
  Vector x(2);
  x << 1, 2;
  const Vector exact = measure_gradient(*quad, x, theta, rng, MeasurementNoise::kOff);
  CHECK(exact(0) == 2.0);
  CHECK(exact(1) == 4.0);

  std::vector<Vector> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(measure_gradient(*quad, x, Vector::Zero(5), rng));
  const Matrix cov = sample_covariance(draws);
  CHECK((cov - quad->noise_covariance()).norm() <= 0.05 * quad->noise_covariance().norm());
}

TEST_CASE("exploration policies") {
  const auto quad = make_problem("quadratic-tracking", 0.6);
  Vector theta(5);
  theta << 1, 2, 1, 0, 1;  // minimizer (1, 2)
  const std::vector<Vector> truth(300, theta);
  ExplorationPolicy gd;
  gd.x0 = Vector::Constant(2, -3.0);
  gd.box_lo = Vector::Constant(2, -5.0);
  gd.box_hi = Vector::Constant(2, 5.0);

  SUBCASE("static descent with zero step stays put") {
    gd.eta = 0.0;
    SeededRng rng(28, 0);
    const auto bundle = explore_collect(*quad, truth, gd, 50, rng);
    for (const auto& x : bundle.x) CHECK((x - gd.x0).norm() == 0.0);
  }
  SUBCASE("noise-free descent approaches the minimizer monotonically") {
    SeededRng rng(28, 0);
    const auto bundle = explore_collect(*quad, truth, gd, 300, rng, MeasurementNoise::kOff);
    Vector xstar(2);
    xstar << 1, 2;
    for (std::size_t t = 1; t < bundle.x.size(); ++t)
      CHECK((bundle.x[t] - xstar).norm() <= (bundle.x[t - 1] - xstar).norm());
  }
  SUBCASE("random box stays in the box") {
    ExplorationPolicy box = gd;
    box.kind = ExplorationKind::kRandomBox;
    SeededRng rng(28, 0);
    const auto bundle = explore_collect(*quad, truth, box, 200, rng);
    for (const auto& x : bundle.x) {
      CHECK(x.minCoeff() >= -5.0);
      CHECK(x.maxCoeff() <= 5.0);
    }
  }
  SUBCASE("fixed sequence replays cyclically") {
    ExplorationPolicy seq = gd;
    seq.kind = ExplorationKind::kFixedSequence;
    seq.sequence = {Vector::Constant(2, 1.0), Vector::Constant(2, -1.0), Vector::Constant(2, 0.5)};
    SeededRng rng(28, 0);
    const auto bundle = explore_collect(*quad, truth, seq, 10, rng);
    for (std::size_t t = 0; t < 10; ++t) CHECK(bundle.x[t] == seq.sequence[t % 3]);
  }
  SUBCASE("divergent descent is reported") {
    ExplorationPolicy wild = gd;
    wild.eta = 2.0;
    SeededRng rng(28, 0);
    CHECK_THROWS_AS(explore_collect(*quad, truth, wild, 100, rng), ExplorationDivergedError);
  }
  SUBCASE("policy names round-trip") {
    for (auto kind : {ExplorationKind::kStaticGradientDescent, ExplorationKind::kRandomBox,
                      ExplorationKind::kFixedSequence})
      CHECK(parse_exploration_kind(exploration_kind_name(kind)) == kind);
    CHECK_THROWS_AS(parse_exploration_kind("zigzag"), ArgumentError);
  }
}

TEST_CASE("simulation is deterministic per seed and stream") {
  const LatentDynamics dyn(0.8 * Matrix::Identity(2, 2), 0.1 * Matrix::Identity(2, 2));
  SeededRng a(5, 3), b(5, 3), c(5, 4);
  const auto pa = simulate_latent(dyn, Vector::Zero(2), 30, a);
  const auto pb = simulate_latent(dyn, Vector::Zero(2), 30, b);
  const auto pc = simulate_latent(dyn, Vector::Zero(2), 30, c);
  for (std::size_t t = 0; t < pa.size(); ++t) CHECK(pa[t] == pb[t]);
  CHECK(pa.back() != pc.back());
}
