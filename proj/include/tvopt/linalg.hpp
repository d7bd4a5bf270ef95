#pragma once

#include <Eigen/Dense>

namespace tvopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Small dense helpers shared by the estimation pipeline. All inputs are tiny
// (p <= ~10), so everything goes through Eigen's dense decompositions.

double spectral_radius(const Matrix& a);
double spectral_norm(const Matrix& a);

// 2-norm condition number via SVD; +inf for singular input.
double condition_number(const Matrix& a);

// Eigenvalue extremes of the symmetric part of `a`.
double min_symmetric_eigenvalue(const Matrix& a);
double max_symmetric_eigenvalue(const Matrix& a);

Matrix symmetrize(const Matrix& a);

// F with F F^T = S for symmetric PSD S. Uses Cholesky when S is PD and falls
// back to an eigen-factorization with negative eigenvalues clipped at zero.
Matrix psd_factor(const Matrix& s);

// a^power by repeated squaring.
Matrix matrix_power(const Matrix& a, unsigned power);

}  // namespace tvopt
