#include "tvopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("spectral_radius: matrix must be square");
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double min_symmetric_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_symmetric_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Matrix psd_factor(const Matrix& s) {
  const Matrix sym = symmetrize(s);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    return l;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

Matrix matrix_power(const Matrix& a, unsigned power) {
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix base = a;
  while (power > 0) {
    if (power & 1u) result = result * base;
    power >>= 1u;
    if (power > 0) base = base * base;
  }
  return result;
}

}  // namespace tvopt
