#include "relmod/random.hpp"

#include <cmath>

namespace relmod {

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(rows, cols);
  // Fill column by column so the stream order is fixed independently of Eigen.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

CVector complex_gaussian_vector(Eigen::Index n, Rng& rng) {
  return complex_gaussian(n, 1, rng).col(0);
}

CMatrix random_density(Eigen::Index d, Rng& rng) {
  const CMatrix g = complex_gaussian(d, d, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

CMatrix haar_unitary(Eigen::Index d, Rng& rng) {
  const CMatrix g = complex_gaussian(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

CMatrix random_hermitian(Eigen::Index d, Rng& rng) {
  const CMatrix g = complex_gaussian(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace relmod
