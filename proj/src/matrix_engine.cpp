#include "relmod/matrix_engine.hpp"

#include "relmod/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace relmod {

bool is_hermitian(const CMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

namespace {

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p, q), p < q.  Only the columns
// are rotated explicitly; rows follow from Hermiticity.
void rotate(CMatrix& a, CMatrix& v, Eigen::Index p, Eigen::Index q) {
  const cplx b = a(p, q);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) return;
  const cplx phase_conj = std::conj(b / abs_b);
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * abs_b);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const cplx jqp = -s * phase_conj, jqq = c * phase_conj;
  const Eigen::Index n = a.rows();

  cplx* cp = a.col(p).data();
  cplx* cq = a.col(q).data();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const cplx akp = cp[k], akq = cq[k];
    cp[k] = c * akp + akq * jqp;
    cq[k] = s * akp + akq * jqq;
    a(p, k) = std::conj(cp[k]);
    a(q, k) = std::conj(cq[k]);
  }
  a(p, p) = app - t * abs_b;
  a(q, q) = aqq + t * abs_b;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  cplx* vp = v.col(p).data();
  cplx* vq = v.col(q).data();
  for (Eigen::Index k = 0; k < v.rows(); ++k) {
    const cplx vkp = vp[k], vkq = vq[k];
    vp[k] = c * vkp + vkq * jqp;
    vq[k] = s * vkp + vkq * jqq;
  }
}

}  // namespace

HermitianEig hermitian_eig(const CMatrix& a_in, int max_sweeps) {
  if (a_in.rows() != a_in.cols())
    throw Error(ErrorCode::DimensionMismatch, "hermitian_eig: matrix is not square");
  if (!a_in.allFinite())
    throw Error(ErrorCode::DomainViolation, "hermitian_eig: non-finite entries");
  if (!is_hermitian(a_in))
    throw Error(ErrorCode::NonHermitian, "hermitian_eig: symmetry tolerance violated");

  const Eigen::Index n = a_in.rows();
  CMatrix a = 0.5 * (a_in + a_in.adjoint());
  CMatrix v = CMatrix::Identity(n, n);
  const double scale = a.norm();
  const double target = 4.0 * std::numeric_limits<double>::epsilon() * scale;

  HermitianEig out;
  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep >= max_sweeps)
      throw Error(ErrorCode::NonConvergence, "hermitian_eig: sweep budget exhausted");
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    ++sweep;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i).real() < a(j, j).real();
  });
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]).real();
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

CMatrix matrix_function(const HermitianEig& eig, const ScalarFunction& f,
                        SpectralDomain domain) {
  const Eigen::Index n = eig.eigenvalues.size();
  const double largest = n > 0 ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double cut = tol::support_cut * largest;
  CVector fl(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double lambda = eig.eigenvalues(k);
    switch (domain) {
      case SpectralDomain::any:
        break;
      case SpectralDomain::nonnegative:
        if (lambda < -std::max(cut, tol::eig * largest)) {
          std::ostringstream msg;
          msg << "matrix_function: eigenvalue " << lambda << " is negative";
          throw Error(ErrorCode::DomainViolation, msg.str());
        }
        lambda = std::max(lambda, 0.0);
        break;
      case SpectralDomain::positive:
        if (!(lambda > cut)) {
          std::ostringstream msg;
          msg << "matrix_function: eigenvalue " << lambda << " below support cut " << cut;
          throw Error(ErrorCode::DomainViolation, msg.str());
        }
        break;
    }
    fl(k) = f(lambda);
  }
  return eig.eigenvectors * fl.asDiagonal() * eig.eigenvectors.adjoint();
}

CMatrix matrix_function(const CMatrix& a, const ScalarFunction& f, SpectralDomain domain) {
  return matrix_function(hermitian_eig(a), f, domain);
}

CMatrix matrix_log(const CMatrix& a) {
  return matrix_function(a, [](double x) { return cplx(std::log(x)); }, SpectralDomain::positive);
}

CMatrix matrix_sqrt(const CMatrix& a) {
  return matrix_function(a, [](double x) { return cplx(std::sqrt(x)); },
                         SpectralDomain::nonnegative);
}

CMatrix matrix_inverse_sqrt(const CMatrix& a) {
  return matrix_function(a, [](double x) { return cplx(1.0 / std::sqrt(x)); },
                         SpectralDomain::positive);
}

CMatrix matrix_exp_hermitian(const CMatrix& a) {
  return matrix_function(a, [](double x) { return cplx(std::exp(x)); });
}

CMatrix unitary_exp(const CMatrix& a, double t) {
  return matrix_function(a, [t](double x) { return std::polar(1.0, t * x); });
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix partial_trace(const CMatrix& x, Subsystem traced, Eigen::Index dim_a,
                      Eigen::Index dim_b) {
  if (x.rows() != dim_a * dim_b || x.cols() != dim_a * dim_b)
    throw Error(ErrorCode::DimensionMismatch, "partial_trace: operator size != d_A * d_B");
  if (traced == Subsystem::B) {
    CMatrix out = CMatrix::Zero(dim_a, dim_a);
    for (Eigen::Index i = 0; i < dim_a; ++i)
      for (Eigen::Index j = 0; j < dim_a; ++j)
        for (Eigen::Index b = 0; b < dim_b; ++b) out(i, j) += x(i * dim_b + b, j * dim_b + b);
    return out;
  }
  CMatrix out = CMatrix::Zero(dim_b, dim_b);
  for (Eigen::Index a = 0; a < dim_a; ++a)
    out += x.block(a * dim_b, a * dim_b, dim_b, dim_b);
  return out;
}

CVector vec(const CMatrix& x) {
  return Eigen::Map<const CVector>(x.data(), x.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorCode::DimensionMismatch, "unvec: length != rows * cols");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix transpose_permutation(Eigen::Index d) {
  CMatrix p = CMatrix::Zero(d * d, d * d);
  // vec index of X(i, j) is i + j d; X^T(i, j) = X(j, i).
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p(i + j * d, j + i * d) = 1.0;
  return p;
}

double operator_norm(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  const CMatrix g = x.cols() <= x.rows() ? CMatrix(x.adjoint() * x) : CMatrix(x * x.adjoint());
  const RVector ev = hermitian_eig(0.5 * (g + g.adjoint())).eigenvalues;
  return std::sqrt(std::max(ev(ev.size() - 1), 0.0));
}

double reconstruction_residual(const CMatrix& a, const HermitianEig& eig) {
  const CMatrix rebuilt =
      eig.eigenvectors * eig.eigenvalues.cast<cplx>().asDiagonal() * eig.eigenvectors.adjoint();
  const double scale = a.norm();
  return scale == 0.0 ? (a - rebuilt).norm() : (a - rebuilt).norm() / scale;
}

}  // namespace relmod
