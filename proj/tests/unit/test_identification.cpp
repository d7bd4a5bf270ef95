#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/identification.hpp"
#include "tvopt/simulation.hpp"

using namespace tvopt;
using namespace tvopt::testing;

namespace {

std::vector<WindowedEstimate> as_estimates(const std::vector<Vector>& thetas, std::size_t first_t = 0) {
  std::vector<WindowedEstimate> out;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    WindowedEstimate e;
    e.t = first_t + i;
    e.theta_tilde = thetas[i];
    out.push_back(std::move(e));
  }
  return out;
}

// Stationary path plus i.i.d. N(0, s^2 I) reconstruction noise.
std::vector<Vector> noisy_path(const LatentDynamics& dyn, std::size_t count, double s, SeededRng& rng) {
  const Vector start = rng.gaussian(psd_factor(dyn.stationary_covariance()));
  auto path = simulate_latent(dyn, start, count - 1, rng);
  for (auto& v : path) v += s * rng.normal_vector(v.size());
  return path;
}

}  // namespace

TEST_CASE("scalar noiseless geometric sequence") {
  for (std::size_t k : {1u, 2u, 5u}) {
    std::vector<Vector> seq;
    for (int t = 0; t < 40; ++t) seq.push_back(Vector::Constant(1, std::pow(0.8, t)));
    const auto est = as_estimates(seq);
    const IdentifiedDynamics iv = iv_identify(est, k);
    CHECK(iv.a_hat(0, 0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK_FALSE(iv.clipped);
  }
}

TEST_CASE("exact regression on noiseless vector data") {
  SeededRng rng(41, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const LatentDynamics base = random_stable_dynamics(3, 0.5, 0.95, 1.0, rng);
    const LatentDynamics dyn(base.a(), Matrix::Zero(3, 3));
    const auto path = simulate_latent(dyn, rng.normal_vector(3), 49, rng);
    const auto est = as_estimates(path);
    CHECK(identification_error(iv_identify(est, 1).a_hat, dyn.a()).frobenius <= 1e-8);
    CHECK(identification_error(ols_identify(est).a_hat, dyn.a()).frobenius <= 1e-8);
  }
}

TEST_CASE("sample count and data requirements") {
  SeededRng rng(42, 0);
  const LatentDynamics dyn = random_stable_dynamics(7, 0.9, 0.99, 0.1, rng);
  // N = 100, k = 20: N - k + 1 = 81 estimates.
  const auto est = as_estimates(noisy_path(dyn, 81, 0.2, rng));
  const IdentifiedDynamics iv = iv_identify(est, 20);
  CHECK(iv.sample_count == 60);
  CHECK(iv.sample_count >= 7);

  // N = 2k + p - 1 is one short.
  const std::vector<WindowedEstimate> short_seq(est.begin(), est.begin() + (2 * 20 + 7 - 1) - 20 + 1);
  CHECK_THROWS_AS(iv_identify(short_seq, 20), InsufficientDataError);
  const std::vector<WindowedEstimate> just(est.begin(), est.begin() + (2 * 20 + 7) - 20 + 1);
  CHECK(iv_identify(just, 20).sample_count == 7);
  CHECK_THROWS_AS(ols_identify(std::vector<WindowedEstimate>(est.begin(), est.begin() + 7)),
                  InsufficientDataError);
}

TEST_CASE("moment sums are formed over the documented index range") {
  // Random sequence; oracle builds the sums with explicit time labels.
  SeededRng rng(43, 0);
  const std::size_t k = 3, n_total = 30;
  std::vector<Vector> seq;
  for (std::size_t i = 0; i + k <= n_total; ++i) seq.push_back(rng.normal_vector(2));
  Matrix m0 = Matrix::Zero(2, 2), m1 = Matrix::Zero(2, 2);
  for (std::size_t t = k; t <= n_total - k - 1; ++t) {
    m0 += seq[t] * seq[t - k].transpose();
    m1 += seq[t + 1] * seq[t - k].transpose();
  }
  const Matrix oracle = m1 * m0.inverse();
  const IdentifiedDynamics iv = iv_identify(as_estimates(seq), k);
  CHECK((iv.a_hat - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
  CHECK(iv.m0_condition == doctest::Approx(condition_number(m0)).epsilon(1e-10));
  CHECK(iv.sample_count == n_total - 2 * k);
}

TEST_CASE("ill-conditioned moments are rejected") {
  std::vector<Vector> seq;
  for (int t = 0; t < 30; ++t) seq.push_back((Vector(2) << std::pow(0.9, t), std::pow(0.9, t)).finished());
  CHECK_THROWS_AS(iv_identify(as_estimates(seq), 1), IllConditionedError);
  CHECK_THROWS_AS(ols_identify(as_estimates(seq)), IllConditionedError);
}

TEST_CASE("stabilization") {
  const Matrix a = 0.95 * Matrix::Identity(2, 2);
  auto [same, flag] = stabilize(a, 1e-3);
  CHECK(same == a);
  CHECK_FALSE(flag);
  auto [scaled, clipped] = stabilize(2.0 * Matrix::Identity(2, 2), 1e-3);
  CHECK(clipped);
  CHECK((scaled - 0.999 * Matrix::Identity(2, 2)).norm() <= 1e-15);
  CHECK_THROWS_AS(stabilize(a, 0.0), ArgumentError);
  CHECK_THROWS_AS(stabilize(a, 0.2), ArgumentError);

  SeededRng rng(44, 0);
  for (int rep = 0; rep < 100; ++rep) {
    Matrix m(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) m(i, j) = rng.normal();
    const double eps = rng.uniform(1e-4, 0.1);
    auto [out, was_clipped] = stabilize(m, eps);
    if (was_clipped) CHECK(spectral_radius(out) == doctest::Approx(1.0 - eps).epsilon(1e-12));
    else CHECK(out == m);
    CHECK(spectral_radius(out) < 1.0);
  }
}

TEST_CASE("identified dynamics keep the raw estimate and a stabilized copy") {
  // Explosive scalar data: raw estimate 1.1, forecast matrix clipped.
  std::vector<Vector> seq;
  for (int t = 0; t < 20; ++t) seq.push_back(Vector::Constant(1, std::pow(1.1, t)));
  const IdentifiedDynamics iv = iv_identify(as_estimates(seq), 1, 1e-3);
  CHECK(iv.a_hat(0, 0) == doctest::Approx(1.1).epsilon(1e-13));
  CHECK(iv.clipped);
  CHECK(iv.a_forecast(0, 0) == doctest::Approx(0.999).epsilon(1e-13));
  CHECK(iv.spectral_radius == doctest::Approx(1.1).epsilon(1e-13));
}

TEST_CASE("identification error") {
  const Matrix a = (Matrix(3, 3) << 0.5, 0.1, 0, 0, 0.4, 0.2, 0.1, 0, 0.3).finished();
  const auto zero = identification_error(a, a);
  CHECK(zero.frobenius == 0.0);
  CHECK(zero.spectral == 0.0);
  const auto shifted = identification_error(a + 0.01 * Matrix::Identity(3, 3), a);
  CHECK(shifted.frobenius == doctest::Approx(0.01 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(shifted.spectral == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(identification_error(a, Matrix::Identity(2, 2)), ArgumentError);
}

TEST_CASE("relabelling time leaves the estimate bitwise unchanged") {
  SeededRng rng(45, 0);
  const LatentDynamics dyn = random_stable_dynamics(3, 0.6, 0.9, 0.5, rng);
  const auto path = noisy_path(dyn, 200, 0.3, rng);
  const IdentifiedDynamics a = iv_identify(as_estimates(path, 0), 2);
  const IdentifiedDynamics b = iv_identify(as_estimates(path, 1234), 2);
  CHECK(a.a_hat == b.a_hat);
}

TEST_CASE("IV removes the attenuation bias of least squares") {
  SeededRng rng(46, 0);
  const LatentDynamics dyn = random_stable_dynamics(3, 0.6, 0.9, 0.5, rng);
  double iv_sum = 0.0, ols_sum = 0.0;
  int iv_wins = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const auto est = as_estimates(noisy_path(dyn, 5000, 0.5, rng));
    const double e_iv = identification_error(iv_identify(est, 1).a_hat, dyn.a()).frobenius;
    const double e_ols = identification_error(ols_identify(est).a_hat, dyn.a()).frobenius;
    iv_sum += e_iv;
    ols_sum += e_ols;
    iv_wins += e_iv < e_ols;
  }
  CHECK(iv_sum < ols_sum);
  CHECK(iv_wins >= 16);
}

TEST_CASE("centered fit on data with a nonzero mean") {
  SeededRng rng(47, 0);
  const LatentDynamics dyn = random_stable_dynamics(3, 0.5, 0.8, 0.3, rng);
  const Vector mean = (Vector(3) << 3.0, -2.0, 1.0).finished();
  auto path = noisy_path(dyn, 20000, 0.0, rng);
  for (auto& v : path) v += mean;
  const auto est = as_estimates(path);
  const IdentifiedDynamics centered = iv_identify_centered(est, 1);
  CHECK(identification_error(centered.a_hat, dyn.a()).frobenius < 0.05);
  CHECK((centered.center - mean).norm() < 0.05);
  // The raw moments see mostly the mean and land far from A.
  CHECK(identification_error(iv_identify(est, 1).a_hat, dyn.a()).frobenius >
        identification_error(centered.a_hat, dyn.a()).frobenius);
  CHECK(iv_identify(est, 1).center.size() == 0);
}
