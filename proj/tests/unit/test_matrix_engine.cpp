#include "catch_amalgamated.hpp"

#include "relmod/errors.hpp"
#include "relmod/matrix_engine.hpp"
#include "relmod/random.hpp"

#include <cmath>

using namespace relmod;

TEST_CASE("hermitian_eig trivial spectra", "[matrix_engine]") {
  auto e = hermitian_eig(CMatrix::Identity(2, 2));
  CHECK(e.eigenvalues(0) == Catch::Approx(1.0));
  CHECK(e.eigenvalues(1) == Catch::Approx(1.0));

  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  e = hermitian_eig(x);
  CHECK(e.eigenvalues(0) == Catch::Approx(-1.0));
  CHECK(e.eigenvalues(1) == Catch::Approx(1.0));
}

TEST_CASE("hermitian_eig matches reference solver up to dimension 64", "[matrix_engine]") {
  Rng rng(11);
  for (Eigen::Index n : {1, 2, 3, 6, 17, 40, 64}) {
    const CMatrix a = random_hermitian(n, rng);
    const auto e = hermitian_eig(a);
    CHECK(reconstruction_residual(a, e) <= 1e-12);
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - CMatrix::Identity(n, n)).norm() <= 1e-12);
    // Independent oracle for the spectrum.
    Eigen::SelfAdjointEigenSolver<CMatrix> ref(a);
    CHECK((ref.eigenvalues() - e.eigenvalues).norm() <= 1e-12 * a.norm());
    for (Eigen::Index k = 1; k < n; ++k) CHECK(e.eigenvalues(k - 1) <= e.eigenvalues(k));
  }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input", "[matrix_engine]") {
  CMatrix a(2, 2);
  a << 1, 2, 0, 1;
  try {
    hermitian_eig(a);
    FAIL("expected NonHermitian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonHermitian);
  }
}

TEST_CASE("hermitian_eig sweep budget", "[matrix_engine]") {
  Rng rng(3);
  const CMatrix a = random_hermitian(12, rng);
  try {
    hermitian_eig(a, 1);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
  }
}

TEST_CASE("matrix functions on diagonal inputs", "[matrix_engine]") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = std::exp(1.0);
  const CMatrix l = matrix_log(d);
  CHECK(std::abs(l(0, 0)) <= 1e-14);
  CHECK(std::abs(l(1, 1) - 1.0) <= 1e-14);

  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const CMatrix s = matrix_sqrt(d);
  CHECK(std::abs(s(0, 0) - 2.0) <= 1e-14);
  CHECK(std::abs(s(1, 1) - 3.0) <= 1e-14);
}

TEST_CASE("exp of log round trip", "[matrix_engine]") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix g = complex_gaussian(4, 4, rng);
    const CMatrix p = g * g.adjoint() + 0.1 * CMatrix::Identity(4, 4);
    const CMatrix back = matrix_exp_hermitian(matrix_log(p));
    CHECK((back - p).norm() / p.norm() <= 1e-10);
  }
}

TEST_CASE("spectral calculus is multiplicative", "[matrix_engine]") {
  Rng rng(6);
  const CMatrix a = random_hermitian(8, rng);
  const auto e = hermitian_eig(a);
  auto f = [](double x) { return cplx(std::sin(x)); };
  auto g = [](double x) { return cplx(x * x + 1.0); };
  auto fg = [](double x) { return cplx(std::sin(x) * (x * x + 1.0)); };
  const CMatrix lhs = matrix_function(e, f) * matrix_function(e, g);
  CHECK((lhs - matrix_function(e, fg)).norm() <= 1e-11 * lhs.norm());
}

TEST_CASE("log refuses eigenvalues below the support cut", "[matrix_engine]") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  try {
    matrix_log(d);
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainViolation);
  }
}

TEST_CASE("unitary_exp is unitary", "[matrix_engine]") {
  Rng rng(8);
  const CMatrix h = random_hermitian(5, rng);
  const CMatrix u = unitary_exp(h, 0.7);
  CHECK((u.adjoint() * u - CMatrix::Identity(5, 5)).norm() <= 1e-13);
}

TEST_CASE("kron products", "[matrix_engine]") {
  CHECK((kron(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)) - CMatrix::Identity(6, 6)).norm() ==
        0.0);
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 2.0; a(1, 1) = 3.0;
  b(0, 0) = 5.0; b(1, 1) = 7.0;
  const CMatrix k = kron(a, b);
  CHECK(k(0, 0) == cplx(10.0));
  CHECK(k(1, 1) == cplx(14.0));
  CHECK(k(2, 2) == cplx(15.0));
  CHECK(k(3, 3) == cplx(21.0));

  Rng rng(9);
  const CMatrix A = complex_gaussian(2, 2, rng), B = complex_gaussian(2, 2, rng);
  const CMatrix C = complex_gaussian(2, 2, rng), D = complex_gaussian(2, 2, rng);
  CHECK((kron(A, B) * kron(C, D) - kron(A * C, B * D)).norm() <= 1e-13);
}

TEST_CASE("partial trace", "[matrix_engine]") {
  Rng rng(10);
  CMatrix ra = random_density(2, rng);
  CMatrix rb = random_density(3, rng);
  CHECK((partial_trace(kron(ra, rb), Subsystem::B, 2, 3) - ra).norm() <= 1e-14);
  CHECK((partial_trace(kron(ra, rb), Subsystem::A, 2, 3) - rb).norm() <= 1e-14);

  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const CMatrix proj = bell * bell.adjoint();
  CHECK((partial_trace(proj, Subsystem::B, 2, 2) - 0.5 * CMatrix::Identity(2, 2)).norm() <= 1e-15);

  const CMatrix x = complex_gaussian(4, 4, rng);
  CHECK(std::abs(partial_trace(x, Subsystem::B, 2, 2).trace() - x.trace()) <= 1e-13);

  const CMatrix rho = random_density(6, rng);
  const CMatrix red = partial_trace(rho, Subsystem::A, 2, 3);
  CHECK(hermitian_eig(red).eigenvalues(0) >= -1e-12);

  CHECK_THROWS_AS(partial_trace(x, Subsystem::A, 3, 2), Error);
}

TEST_CASE("vec conventions", "[matrix_engine]") {
  const CVector v = vec(CMatrix::Identity(2, 2));
  CHECK(v(0) == cplx(1.0));
  CHECK(v(1) == cplx(0.0));
  CHECK(v(2) == cplx(0.0));
  CHECK(v(3) == cplx(1.0));

  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix a = complex_gaussian(3, 3, rng), x = complex_gaussian(3, 3, rng),
                  b = complex_gaussian(3, 3, rng);
    CHECK((unvec(vec(x), 3, 3) - x).norm() == 0.0);
    CHECK((vec(a * x * b) - kron(b.transpose(), a) * vec(x)).norm() <= 1e-13);
    CHECK((vec(x.transpose()) - transpose_permutation(3) * vec(x)).norm() == 0.0);
  }
  CHECK_THROWS_AS(unvec(v, 3, 3), Error);
}
