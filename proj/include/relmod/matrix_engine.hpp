#pragma once

// Dense complex linear algebra used by every other module: a cyclic Jacobi
// eigensolver for Hermitian matrices, spectral matrix functions, Kronecker
// products, partial traces and column-stacking vectorisation.

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace relmod {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-10;
inline constexpr double eig = 1e-10;
// Relative to the largest eigenvalue magnitude.
inline constexpr double support_cut = 1e-12;
}  // namespace tol

struct HermitianEig {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors; // columns, unitary
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
/// Throws NonHermitian when ||A - A^dagger||_F > tol::herm * ||A||_F and
/// NonConvergence when the sweep budget runs out.
HermitianEig hermitian_eig(const CMatrix& a, int max_sweeps = 60);

bool is_hermitian(const CMatrix& a, double rel_tol = tol::herm);

enum class SpectralDomain {
  any,          // f defined on all of R
  nonnegative,  // sqrt and friends; small negative rounding is clamped to 0
  positive,     // log, inverse, negative powers; requires lambda > support_cut
};

using ScalarFunction = std::function<cplx(double)>;

/// V f(Lambda) V^dagger.  Eigenvalues violating `domain` raise DomainViolation.
CMatrix matrix_function(const CMatrix& a, const ScalarFunction& f,
                        SpectralDomain domain = SpectralDomain::any);
CMatrix matrix_function(const HermitianEig& eig, const ScalarFunction& f,
                        SpectralDomain domain = SpectralDomain::any);

CMatrix matrix_log(const CMatrix& a);
CMatrix matrix_sqrt(const CMatrix& a);
CMatrix matrix_inverse_sqrt(const CMatrix& a);
CMatrix matrix_exp_hermitian(const CMatrix& a);
/// exp(i * t * A) for Hermitian A.
CMatrix unitary_exp(const CMatrix& a, double t = 1.0);

CMatrix kron(const CMatrix& a, const CMatrix& b);

enum class Subsystem { A, B };

/// Trace out `traced` from an operator on H_A (x) H_B (A is the slow index).
CMatrix partial_trace(const CMatrix& x, Subsystem traced, Eigen::Index dim_a,
                      Eigen::Index dim_b);

/// Column-stacking: vec(A X B) = (B^T (x) A) vec(X).
CVector vec(const CMatrix& x);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

/// Permutation P with vec(X^T) = P vec(X) for square X of size d.
CMatrix transpose_permutation(Eigen::Index d);

/// Largest singular value, from the spectrum of X^dagger X.
double operator_norm(const CMatrix& x);

/// Relative residual ||A - V Lambda V^dagger||_F / ||A||_F.
double reconstruction_residual(const CMatrix& a, const HermitianEig& eig);

}  // namespace relmod
