#include "relmod/errors.hpp"
#include "relmod/random.hpp"
#include "relmod/signalling.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace relmod;

TEST_CASE("truncated shifts", "[signalling]") {
  SECTION("disjoint ranges at D = 8") {
    const auto tc = build_truncated_cuntz(2, 8);
    const SMatrix x = SMatrix(tc.shift(0).adjoint()) * tc.shift(1);
    CHECK(x.norm() == 0.0);
  }
  SECTION("defect-free dimension at D = 64") {
    // k = 0..31 satisfy 2k + 1 < 64.
    CHECK(build_truncated_cuntz(2, 64).defect_free_dim() == 32);
    CHECK(build_truncated_cuntz(3, 64).defect_free_dim() == 21);
  }
  SECTION("range projections sum to the identity") {
    const auto tc = build_truncated_cuntz(2, 16);
    SMatrix sum(16, 16);
    for (int j = 0; j < 2; ++j) sum += tc.shift(j) * SMatrix(tc.shift(j).adjoint());
    CVector e5 = CVector::Zero(16);
    e5(5) = 1.0;
    CHECK((sum * e5 - e5).norm() == 0.0);
  }
  SECTION("relations are exact on the defect-free subspace only") {
    for (int n : {2, 3}) {
      const auto rep = build_truncated_cuntz(n, 27).relation_residuals();
      CHECK(rep.defect_free_residual == 0.0);
      CHECK(rep.full_space_defect > 0.5);
    }
  }
  SECTION("too small") {
    try {
      build_truncated_cuntz(3, 8);
      FAIL("expected DimensionTooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionTooSmall);
    }
  }
}

TEST_CASE("non-signalling checks", "[signalling]") {
  const auto tc = build_truncated_cuntz(2, 16);
  const Eigen::Index d = tc.dim();
  SECTION("identity") {
    const auto sc = make_two_factor_scenario(tc, sparse_identity(d * d), 3, 5);
    const auto rep = nonsignalling_check(sc);
    CHECK(rep.pairs == 9);
    CHECK(rep.max_residual <= 1e-13);
  }
  SECTION("product form") {
    Rng rng(9);
    const CMatrix up = haar_unitary(d, rng), u = haar_unitary(d, rng);
    const SMatrix w = sparse_kron(up.sparseView(), u.sparseView());
    CHECK(nonsignalling_check(make_two_factor_scenario(tc, w, 3, 6)).max_residual <= 1e-13);
  }
  SECTION("Cuntz sum") {
    const auto big = build_truncated_cuntz(2, 32);
    const auto rep = nonsignalling_check(make_two_factor_scenario(big, cuntz_sum_unitary(big), 2, 7));
    CHECK(rep.max_residual <= 1e-12);
  }
  SECTION("a generic unitary signals") {
    Rng rng(11);
    const SMatrix w = CMatrix(haar_unitary(d * d, rng)).sparseView();
    CHECK(nonsignalling_check(make_two_factor_scenario(tc, w, 2, 8)).max_residual > 1.0);
  }
}

TEST_CASE("Haar samples are unitary", "[signalling]") {
  Rng rng(3);
  for (int k = 0; k < 5; ++k) {
    const CMatrix u = haar_unitary(64, rng);
    CHECK((u.adjoint() * u - CMatrix::Identity(64, 64)).norm() <= 1e-12);
  }
}

TEST_CASE("norm-gap floor", "[signalling]") {
  CHECK(norm_gap_floor(0.01) == Catch::Approx(0.99 * std::sqrt(2 - std::sqrt(2.0)) - 2 * std::sqrt(0.02)));
  CHECK(norm_gap_floor(0.01) == Catch::Approx(0.474871).margin(1e-6));
  const double root = norm_gap_floor_root();
  CHECK(std::abs(norm_gap_floor(root)) <= 1e-12);
  CHECK(root == Catch::Approx(0.06411).margin(1e-4));
  double prev = norm_gap_floor(1e-4);
  for (double e = 2e-4; e < 0.06; e += 1e-3) {
    CHECK(norm_gap_floor(e) < prev);
    prev = norm_gap_floor(e);
  }
}

TEST_CASE("norm-gap experiment", "[signalling]") {
  for (double eps : {0.001, 0.005, 0.01}) {
    const auto rep = norm_gap_experiment(eps, 20, 32);
    CHECK(rep.pass);
    CHECK(rep.min_gap >= rep.floor);
    CHECK(rep.adversarial_gap >= rep.floor);
    CHECK(rep.adversarial_gap <= rep.min_gap);
  }
  try {
    norm_gap_experiment(0.07, 1);
    FAIL("expected ParameterViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParameterViolation);
  }
  CHECK_THROWS_AS(norm_gap_experiment(0.01, 1, 5), Error);
}

TEST_CASE("product reconstruction", "[signalling]") {
  SECTION("middle Cuntz family") {
    const auto rep = product_reconstruction(2, 8, 16);
    CHECK(rep.residual <= 1e-12);
    CHECK(rep.unitarity_u <= 1e-12);
    CHECK(rep.unitarity_u_prime <= 1e-12);
    CHECK(rep.pass);
  }
  SECTION("single term") {
    const auto rep = product_reconstruction(1, 4, 4);
    CHECK(rep.residual == 0.0);
    CHECK(rep.pass);
  }
  SECTION("no middle factor") {
    const auto cert = product_form_gap(2, 16);
    CHECK(cert.certified);
    CHECK(cert.relative_distance == Catch::Approx(0.5).margin(0.05));
    CHECK(cert.singular_values.size() == 2);
    CHECK_FALSE(product_form_gap(1, 8).certified);
  }
}
