#include "tvopt/estimation.hpp"

#include <string>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

struct Whitened {
  Matrix w;  // L^-1 C_bar
  Vector z;  // L^-1 y_bar
};

Whitened whiten(const StackedWindow& window) {
  const Eigen::Index rows = window.c_bar.rows();
  if (window.y_bar.size() != rows || window.r_bar.rows() != rows || window.r_bar.cols() != rows)
    throw ArgumentError("stacked window has inconsistent dimensions");
  Eigen::LLT<Matrix> llt(window.r_bar);
  if (llt.info() != Eigen::Success) throw ArgumentError("window covariance is not positive definite");
  Whitened out;
  out.w = llt.matrixL().solve(window.c_bar);
  out.z = llt.matrixL().solve(window.y_bar);
  return out;
}

void check_condition(double smax, double smin) {
  const double cond = smin > 0.0 ? (smax / smin) * (smax / smin)
                                 : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxGramCondition))
    throw IllConditionedError("window Gram matrix condition number " + std::to_string(cond) +
                                  " exceeds 1e12",
                              cond);
}

}  // namespace

StackedWindow build_window(const TrajectoryBundle& bundle, const GradientOracleModel& model,
                           std::size_t t, std::size_t k) {
  const std::size_t n_collect = bundle.collected();
  if (k == 0 || t + k > n_collect)
    throw ArgumentError("window [" + std::to_string(t) + ", " + std::to_string(t + k) +
                        ") exceeds the " + std::to_string(n_collect) + " collected samples");
  const Eigen::Index n = model.n();
  const Eigen::Index p = model.p();
  const Eigen::Index rows = static_cast<Eigen::Index>(k) * n;
  if (rows < p)
    throw ArgumentError("window length " + std::to_string(k) + " gives kn = " +
                        std::to_string(rows) + " < p = " + std::to_string(p));
  StackedWindow window;
  window.t = t;
  window.y_bar.resize(rows);
  window.c_bar.resize(rows, p);
  window.r_bar = Matrix::Zero(rows, rows);
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Index row = static_cast<Eigen::Index>(j) * n;
    window.y_bar.segment(row, n) = bundle.y[t + j];
    window.c_bar.middleRows(row, n) = model.jacobian_t(bundle.x[t + j]);
    window.r_bar.block(row, row, n, n) = model.noise_covariance();
  }
  Eigen::JacobiSVD<Matrix> svd(window.c_bar);
  const auto& s = svd.singularValues();
  if (!(s(p - 1) > 1e-10 * s(0)))
    throw ExcitationError("stacked matrix for the window at t = " + std::to_string(t) +
                              " is rank deficient",
                          t);
  return window;
}

WindowedEstimate gauss_markov_estimate(const StackedWindow& window, GaussMarkovMethod method) {
  const Whitened wh = whiten(window);
  const Eigen::Index p = wh.w.cols();
  if (wh.w.rows() < p) throw ArgumentError("window has fewer rows than parameters");
  WindowedEstimate est;
  est.t = window.t;
  const Matrix identity = Matrix::Identity(p, p);

  if (method == GaussMarkovMethod::kWhitenedQr) {
    Eigen::HouseholderQR<Matrix> qr(wh.w);
    const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Matrix> svd(r);
    const auto& s = svd.singularValues();
    check_condition(s(0), s(p - 1));
    const Vector qtz = (qr.householderQ().transpose() * wh.z).head(p);
    const auto upper = r.triangularView<Eigen::Upper>();
    est.theta_tilde = upper.solve(qtz);
    // (W^T W)^-1 = R^-1 R^-T
    const Matrix r_inv = upper.solve(identity);
    est.sigma_eta = symmetrize(r_inv * r_inv.transpose());
    est.alpha_k = s(p - 1) * s(p - 1);
    est.gram_max = s(0) * s(0);
  } else {
    const Matrix gram = symmetrize(wh.w.transpose() * wh.w);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    const double lmax = es.eigenvalues()(p - 1);
    check_condition(std::sqrt(std::max(lmax, 0.0)), std::sqrt(std::max(lmin, 0.0)));
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw IllConditionedError("window Gram matrix is not positive definite",
                                std::numeric_limits<double>::infinity());
    est.theta_tilde = llt.solve(wh.w.transpose() * wh.z);
    est.sigma_eta = symmetrize(llt.solve(identity));
    est.alpha_k = lmin;
    est.gram_max = lmax;
  }
  return est;
}

double gauss_markov_gain_check(const StackedWindow& window, GaussMarkovMethod method) {
  const Whitened wh = whiten(window);
  const Eigen::Index p = wh.w.cols();
  const Matrix identity = Matrix::Identity(p, p);
  // K* C_bar = (W^T W)^-1 W^T W, evaluated without forming K*.
  Matrix kc;
  if (method == GaussMarkovMethod::kWhitenedQr) {
    Eigen::HouseholderQR<Matrix> qr(wh.w);
    const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Matrix qtw = (qr.householderQ().transpose() * wh.w).topRows(p);
    kc = r.triangularView<Eigen::Upper>().solve(qtw);
  } else {
    const Matrix gram = symmetrize(wh.w.transpose() * wh.w);
    kc = gram.llt().solve(wh.w.transpose() * wh.w);
  }
  return (kc - identity).norm();
}

EstimateSeries estimate_all(const TrajectoryBundle& bundle, const GradientOracleModel& model,
                            std::size_t k, GaussMarkovMethod method) {
  const std::size_t n_collect = bundle.collected();
  if (k == 0 || n_collect < k)
    throw ArgumentError("estimate_all: need N >= k (N = " + std::to_string(n_collect) +
                        ", k = " + std::to_string(k) + ")");
  EstimateSeries series;
  series.window = k;
  series.estimates.reserve(n_collect - k + 1);
  for (std::size_t t = 0; t + k <= n_collect; ++t) {
    const StackedWindow window = build_window(bundle, model, t, k);
    try {
      series.estimates.push_back(gauss_markov_estimate(window, method));
    } catch (const IllConditionedError& e) {
      throw IllConditionedError("window at t = " + std::to_string(t) + ": " + e.what(),
                                e.condition());
    }
  }
  series.min_alpha_k = series.estimates.front().alpha_k;
  for (const auto& est : series.estimates)
    series.min_alpha_k = std::min(series.min_alpha_k, est.alpha_k);
  return series;
}

}  // namespace tvopt
