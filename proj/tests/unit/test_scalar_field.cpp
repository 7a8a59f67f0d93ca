#include "relmod/errors.hpp"
#include "relmod/scalar_field.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace relmod;

namespace {

constexpr double pi = std::numbers::pi;

BumpFunction bump(Point c, Point w, double a = 1.0) {
  BumpFunction b;
  b.center = c;
  b.width = w;
  b.amplitude = a;
  return b;
}

InitialData data_1d(double c, double w, double mass = 0.0) {
  InitialData g;
  g.dimension = 1;
  g.mass = mass;
  g.g0.terms.push_back(bump({c, 0, 0}, {w, 1, 1}));
  return g;
}

double rel_dev(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Radial profile of a round bump and its derivative.
double radial(double rho, double w) {
  const double s2 = rho * rho / (w * w);
  return s2 >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s2));
}
double radial_prime(double rho, double w) {
  const double s2 = rho * rho / (w * w);
  if (s2 >= 1.0) return 0.0;
  const double q = 1.0 / (1.0 - s2);
  return -radial(rho, w) * q * q * 2.0 * rho / (w * w);
}

template <class F>
double reference(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, 1e-14);
}

}  // namespace

TEST_CASE("bump gradient matches finite differences", "[scalar_field]") {
  const BumpFunction b = bump({0.3, -0.2, 0.1}, {0.7, 0.5, 0.9}, 1.7);
  const Point x{0.5, -0.1, 0.2};
  Point grad{};
  const double v = b.value_gradient(x, 3, grad);
  CHECK(v == Catch::Approx(b.value(x, 3)).epsilon(1e-15));
  for (int k = 0; k < 3; ++k) {
    Point xp = x, xm = x;
    const double h = 1e-6;
    xp[k] += h;
    xm[k] -= h;
    CHECK(grad[k] == Catch::Approx((b.value(xp, 3) - b.value(xm, 3)) / (2 * h)).epsilon(1e-7));
  }
  CHECK(b.value({1.0, 0.0, 0.0}, 3) == 0.0);
}

TEST_CASE("zero data gives zero everywhere", "[scalar_field]") {
  InitialData g;
  g.dimension = 2;
  CHECK(exact_entropy_wedge(g).value == 0.0);
  CHECK(exact_entropy_cone(g, 1.0).value == 0.0);
  const auto prof = eta_st(1.5, 3.0);
  CHECK(entropy_bound(g, Geometry::wedge(), Side::upper, prof, 0.1).value == 0.0);
  CHECK(entropy_bound(g, Geometry::wedge(), Side::lower, prof, 0.1).value == 0.0);
  CHECK(tau0(g, Geometry::wedge())(0.3) == 0.0);
}

TEST_CASE("wedge entropy in d=1 agrees with an independent quadrature", "[scalar_field]") {
  const InitialData g = data_1d(2.0, 1.0);
  const double h = exact_entropy_wedge(g).value;
  const double ref = reference(
      [](double x) {
        const double d = radial_prime(x - 2.0, 1.0);
        return 0.5 * pi * x * d * d;
      },
      1.0, 3.0);
  CHECK(rel_dev(h, ref) <= 1e-8);

  QuadratureOptions fine;
  fine.rel_tol = 1e-13;
  fine.min_depth = 3;
  CHECK(rel_dev(exact_entropy_wedge(g, fine).value, h) <= 1e-8);
}

TEST_CASE("massive wedge entropy includes the mass term", "[scalar_field]") {
  const InitialData g = data_1d(2.0, 1.0, 1.0);
  const double ref = reference(
      [](double x) {
        const double d = radial_prime(x - 2.0, 1.0), v = radial(x - 2.0, 1.0);
        return 0.5 * pi * x * (d * d + v * v);
      },
      1.0, 3.0);
  CHECK(rel_dev(exact_entropy_wedge(g).value, ref) <= 1e-9);
}

TEST_CASE("d=2 wedge entropy is invariant under perpendicular translation", "[scalar_field]") {
  InitialData g;
  g.dimension = 2;
  g.g0.terms.push_back(bump({1.5, 0.0, 0}, {0.8, 0.6, 1}));
  g.g1.terms.push_back(bump({1.2, 0.3, 0}, {0.5, 0.5, 1}, 0.4));
  const double h0 = exact_entropy_wedge(g).value;
  for (auto& b : g.g0.terms) b.center[1] += 2.75;
  for (auto& b : g.g1.terms) b.center[1] += 2.75;
  CHECK(rel_dev(exact_entropy_wedge(g).value, h0) <= 1e-9);
  CHECK(h0 > 0.0);
}

TEST_CASE("cone entropy for a central bump in d=3", "[scalar_field]") {
  InitialData g;
  g.dimension = 3;
  g.g0.terms.push_back(bump({0, 0, 0}, {0.5, 0.5, 0.5}));
  const double r = 1.0;
  const double h = exact_entropy_cone(g, r).value;
  // Radial reduction: 4 pi rho^2 times the density.
  const double ref = reference(
      [&](double rho) {
        const double d = radial_prime(rho, 0.5), v = radial(rho, 0.5);
        const double beta = (r * r - rho * rho) / (2 * r);
        return 0.5 * pi * 4 * pi * rho * rho * (beta * d * d + v * v / r);
      },
      0.0, 0.5);
  CHECK(rel_dev(h, ref) <= 1e-7);
}

TEST_CASE("cone entropy in d=1 has no curvature term", "[scalar_field]") {
  const InitialData g = data_1d(0.2, 0.5);
  const double r = 1.0;
  const double ref = reference(
      [&](double x) {
        const double d = radial_prime(x - 0.2, 0.5);
        return 0.5 * pi * (r * r - x * x) / (2 * r) * d * d;
      },
      -0.3, 0.7);
  CHECK(rel_dev(exact_entropy_cone(g, r).value, ref) <= 1e-9);
}

TEST_CASE("cone entropy rejects massive data", "[scalar_field]") {
  InitialData g = data_1d(0.0, 0.5, 1.0);
  CHECK_THROWS_AS(exact_entropy_cone(g, 1.0), Error);
  try {
    exact_entropy_cone(g, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MassNotZero);
  }
}

TEST_CASE("tau0 reduces correctly", "[scalar_field]") {
  SECTION("d=1 wedge is pointwise g0^2") {
    const InitialData g = data_1d(0.4, 0.9);
    const auto tau = tau0(g, Geometry::wedge());
    for (double x : {-0.3, 0.0, 0.4, 1.0}) CHECK(tau(x) == Catch::Approx(std::pow(radial(x - 0.4, 0.9), 2)).margin(1e-300));
  }
  SECTION("d=2 wedge integrates to the full L2 norm") {
    InitialData g;
    g.dimension = 2;
    g.g0.terms.push_back(bump({0.1, -0.3, 0}, {0.7, 0.7, 1}));
    const auto tau = tau0(g, Geometry::wedge());
    const double total = reference(tau, -0.6, 0.8);
    const double ref = reference([](double rho) { return 2 * pi * rho * std::pow(radial(rho, 0.7), 2); }, 0.0, 0.7);
    CHECK(rel_dev(total, ref) <= 1e-9);
  }
  SECTION("d=3 sphere integral of a central bump") {
    InitialData g;
    g.dimension = 3;
    g.g0.terms.push_back(bump({0, 0, 0}, {0.5, 0.5, 0.5}));
    const auto tau = tau0(g, Geometry::cone(1.0));
    CHECK(rel_dev(tau(0.3), 4 * pi * std::pow(radial(0.3, 0.5), 2)) <= 1e-12);
  }
}

TEST_CASE("interior data: bounds equal shifted weights and the gap is linear", "[scalar_field]") {
  InitialData g;
  g.dimension = 2;
  g.mass = 1.0;
  g.g0.terms.push_back(bump({2.0, 0.0, 0}, {0.8, 0.6, 1}));
  g.g1.terms.push_back(bump({1.8, 0.2, 0}, {0.5, 0.5, 1}, -0.5));
  const auto prof = eta_st(1.5, 3.0);
  const double energy_total = field_energy(g).value;
  for (double eps : {0.1, 0.01, 0.001}) {
    const double hp = entropy_bound(g, Geometry::wedge(), Side::upper, prof, eps).value;
    const double hm = entropy_bound(g, Geometry::wedge(), Side::lower, prof, eps).value;
    CHECK(rel_dev(hp, weighted_entropy(g, Region::wedge(-2 * eps)).value) <= 1e-10);
    CHECK(rel_dev(hm, weighted_entropy(g, Region::wedge(2 * eps)).value) <= 1e-10);
    CHECK(rel_dev(hp - hm, 2 * pi * eps * energy_total) <= 1e-6);
  }
}

TEST_CASE("bounds bracket the exact entropy for boundary-touching data", "[scalar_field]") {
  const auto prof = eta_st(1.5, 6.0);
  SECTION("wedge d=1") {
    const InitialData g = data_1d(0.2, 0.6, 1.0);
    const double he = exact_entropy_wedge(g).value;
    for (double eps : {0.05, 0.01}) {
      const double hp = entropy_bound(g, Geometry::wedge(), Side::upper, prof, eps).value;
      const double hm = entropy_bound(g, Geometry::wedge(), Side::lower, prof, eps).value;
      CHECK(hm <= he);
      CHECK(he <= hp);
    }
  }
  SECTION("cone d=2") {
    InitialData g;
    g.dimension = 2;
    g.g0.terms.push_back(bump({0.9, 0.0, 0}, {0.3, 0.3, 1}));
    const double he = exact_entropy_cone(g, 1.0).value;
    const double hp = entropy_bound(g, Geometry::cone(1.0), Side::upper, prof, 0.02).value;
    const double hm = entropy_bound(g, Geometry::cone(1.0), Side::lower, prof, 0.02).value;
    CHECK(hm <= he);
    CHECK(he <= hp);
  }
}

TEST_CASE("boundary term prediction", "[scalar_field]") {
  const auto prof = eta_st(1.5, 6.0);
  SECTION("vanishes for interior data") {
    const InitialData g = data_1d(2.0, 0.5);
    CHECK(boundary_term_prediction(g, Geometry::wedge(), prof, Side::upper) == 0.0);
    CHECK(boundary_term_prediction(g, Geometry::wedge(), prof, Side::lower) == 0.0);
  }
  SECTION("wedge limit is approached as epsilon shrinks") {
    const InitialData g = data_1d(0.1, 0.6);
    const double he = exact_entropy_wedge(g).value;
    const double pred = boundary_term_prediction(g, Geometry::wedge(), prof, Side::upper);
    CHECK(pred == Catch::Approx(0.5 * pi * std::pow(radial(-0.1, 0.6), 2) * energy(prof).value));
    const double d1 = entropy_bound(g, Geometry::wedge(), Side::upper, prof, 2e-3).value - he;
    const double d2 = entropy_bound(g, Geometry::wedge(), Side::upper, prof, 1e-3).value - he;
    CHECK(rel_dev(2 * d2 - d1, pred) <= 0.01);
    const double low = boundary_term_prediction(g, Geometry::wedge(), prof, Side::lower);
    CHECK(low < 0.0);
  }
  SECTION("shrinks as s approaches 1") {
    const InitialData g = data_1d(0.1, 0.6);
    const double a = boundary_term_prediction(g, Geometry::wedge(), eta_st(2.0, 400.0), Side::upper);
    const double b = boundary_term_prediction(g, Geometry::wedge(), eta_st(1.05, 4000.0), Side::upper);
    CHECK(b < a);
  }
}

TEST_CASE("squeeze sweep validation", "[scalar_field]") {
  const InitialData g = data_1d(2.0, 0.5);
  CHECK(squeeze_sweep(g, Geometry::wedge(), {}).empty());
  try {
    squeeze_sweep(g, Geometry::wedge(), {{0.1, 1.5, 2.0}});
    FAIL("expected ScheduleViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScheduleViolation);
  }
  const auto recs = squeeze_sweep(g, Geometry::wedge(), {{0.1, 2.0, 4.0}, {0.01, 1.5, 6.0}});
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.H_minus <= r.H_exact + r.quad_error_estimate);
    CHECK(r.H_exact <= r.H_plus + r.quad_error_estimate);
  }
  CHECK(recs[1].gap() < recs[0].gap());
}

TEST_CASE("geometry violations are reported", "[scalar_field]") {
  const InitialData g = data_1d(0.0, 0.5);
  const auto prof = eta_st(1.5, 3.0);
  try {
    entropy_bound(g, Geometry::cone(1.0), Side::upper, prof, 0.6);
    FAIL("expected GeometryViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GeometryViolation);
  }
  CHECK_THROWS_AS(entropy_bound(g, Geometry::wedge(), Side::upper, prof, 0.0), Error);
}

TEST_CASE("modular flows", "[scalar_field]") {
  const SpacetimePoint x{0.2, 0.5, -0.1, 0.3};
  SECTION("identity at s = 0") {
    for (const auto& geo : {Geometry::wedge(), Geometry::cone(1.0)}) {
      const auto p = modular_flow_point(geo, 0.0, x, 3);
      for (int k = 0; k < 4; ++k) CHECK(p.x[k] == Catch::Approx(x[k]).margin(1e-15));
      CHECK(p.jacobian == Catch::Approx(1.0));
    }
  }
  SECTION("boost preserves the interval") {
    const auto p = modular_flow_point(Geometry::wedge(), 1.3, x, 3);
    const double before = x[1] * x[1] - x[0] * x[0];
    const double after = p.x[1] * p.x[1] - p.x[0] * p.x[0];
    CHECK(std::abs(after - before) <= 1e-12);
    CHECK(p.x[2] == x[2]);
  }
  SECTION("group law") {
    for (const auto& geo : {Geometry::wedge(), Geometry::cone(1.0)}) {
      for (int d = 1; d <= 3; ++d) {
        const auto a = modular_flow_point(geo, 0.4, modular_flow_point(geo, -0.7, x, d).x, d);
        const auto b = modular_flow_point(geo, -0.3, x, d);
        for (int k = 0; k < 4; ++k) CHECK(std::abs(a.x[k] - b.x[k]) <= 1e-10);
      }
    }
  }
  SECTION("cone boundary sphere is fixed") {
    const SpacetimePoint y{0.0, 0.6, 0.0, 0.8};
    const auto p = modular_flow_point(Geometry::cone(1.0), 2.1, y, 3);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(p.x[k] - y[k]) <= 1e-14);
    CHECK(p.jacobian == Catch::Approx(1.0));
  }
  SECTION("flow stays inside the double cone") {
    const auto p = modular_flow_point(Geometry::cone(1.0), 3.0, x, 3);
    const double rr = std::hypot(p.x[1], p.x[2], p.x[3]);
    CHECK(std::abs(p.x[0]) + rr < 1.0);
  }
  SECTION("singular chart") {
    const SpacetimePoint far{0.0, 3.0, 0.0, 0.0};
    try {
      modular_flow_point(Geometry::cone(1.0), 5.0, far, 1);
      FAIL("expected FlowSingularity");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::FlowSingularity);
    }
  }
}
