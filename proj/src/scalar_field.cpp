#include "relmod/scalar_field.hpp"

#include "relmod/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace relmod {

namespace {

constexpr double kPi = std::numbers::pi;

using Triple = std::array<double, 3>;

// Options for the nested slice integrals and the largest relative error
// estimate they reported, used to widen the error of the outer integral.
struct SliceStats {
  explicit SliceStats(const InitialData& g) : inner(inner_quadrature_options(g)) {}
  QuadratureOptions inner;
  double max_rel = 0.0;
  void note(const QuadratureResultN<3>& r) {
    double scale = 0.0;
    for (double v : r.value) scale = std::max(scale, std::abs(v));
    // Slices below the absolute tolerance are resolved only to that level and
    // say nothing about the relative accuracy of the rest.
    if (scale > 1e12 * inner.abs_tol) max_rel = std::max(max_rel, r.error / scale);
  }
};

double bump_arg(const BumpFunction& b, const Point& x, int d) {
  double s2 = 0.0;
  for (int k = 0; k < d; ++k) {
    const double u = (x[k] - b.center[k]) / b.width[k];
    s2 += u * u;
  }
  return s2;
}

// {|grad g0|^2 + m^2 g0^2 + g1^2, g0 (n . grad g0), g0^2}
Triple densities(const InitialData& g, const Point& x, const Point& n) {
  Point grad{};
  const double v0 = g.g0.value_gradient(x, g.dimension, grad);
  const double v1 = g.g1.value(x, g.dimension);
  double gg = 0.0, dn = 0.0;
  for (int k = 0; k < g.dimension; ++k) {
    gg += grad[k] * grad[k];
    dn += grad[k] * n[k];
  }
  return {gg + g.mass * g.mass * v0 * v0 + v1 * v1, v0 * dn, v0 * v0};
}

void add_slice_breaks(const BumpSum& sum, const Point& x, int axis, std::vector<double>& out) {
  for (const auto& b : sum.terms) {
    double r2 = 1.0;
    for (int j = 0; j < axis; ++j) {
      const double u = (x[j] - b.center[j]) / b.width[j];
      r2 -= u * u;
    }
    if (r2 <= 0.0) continue;
    const double half = b.width[axis] * std::sqrt(r2);
    out.push_back(b.center[axis] - half);
    out.push_back(b.center[axis]);
    out.push_back(b.center[axis] + half);
  }
}

// Integral of the densities over axes axis..d-1 with the earlier axes fixed.
Triple wedge_slice(const InitialData& g, Point x, int axis, SliceStats& st) {
  static const Point e1{1.0, 0.0, 0.0};
  if (axis == g.dimension) return densities(g, x, e1);
  std::vector<double> breaks;
  add_slice_breaks(g.g0, x, axis, breaks);
  add_slice_breaks(g.g1, x, axis, breaks);
  if (breaks.empty()) return {0.0, 0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(breaks.begin(), breaks.end());
  const double a = *lo, b = *hi;
  const auto r = integrate_n<3>(
      [&](double y) {
        Point p = x;
        p[axis] = y;
        return wedge_slice(g, p, axis + 1, st);
      },
      a, b, breaks, st.inner);
  st.note(r);
  return r.value;
}

Triple wedge_slice_at(const InitialData& g, double x1, SliceStats& st) {
  Point x{};
  x[0] = x1;
  return wedge_slice(g, x, 1, st);
}

// Angular position and half-extent of every bump seen from the origin, for
// placing panel edges on circles and spheres.  Bumps covering the origin are
// skipped; they are spread over all directions anyway.
struct AngularFeature {
  Point direction{};
  double half_angle = 0.0;
};

std::vector<AngularFeature> angular_features(const InitialData& g) {
  std::vector<AngularFeature> out;
  for (const BumpSum* sum : {&g.g0, &g.g1}) {
    for (const auto& b : sum->terms) {
      double c2 = 0.0, w = 0.0;
      for (int k = 0; k < g.dimension; ++k) {
        c2 += b.center[k] * b.center[k];
        w = std::max(w, b.width[k]);
      }
      const double c = std::sqrt(c2);
      if (c <= w) continue;
      AngularFeature f;
      for (int k = 0; k < g.dimension; ++k) f.direction[k] = b.center[k] / c;
      f.half_angle = std::asin(w / c);
      out.push_back(f);
    }
  }
  return out;
}

double wrap_angle(double phi) {
  phi = std::fmod(phi, 2.0 * kPi);
  return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

// Integral over the azimuth in [0, 2 pi) with panel edges at the features.
template <class F>
Triple azimuth_integral(const F& f, const std::vector<double>& breaks, SliceStats& st) {
  const auto r = integrate_n<3>(f, 0.0, 2.0 * kPi, breaks, st.inner);
  st.note(r);
  return r.value;
}

// Integral of the densities over the sphere of radius rho, per unit solid
// angle (no rho^{d-1} factor), with the radial direction as normal.
Triple sphere_slice(const InitialData& g, double rho, SliceStats& st) {
  const int d = g.dimension;
  if (d == 1) {
    const Triple a = densities(g, {rho, 0.0, 0.0}, {1.0, 0.0, 0.0});
    const Triple b = densities(g, {-rho, 0.0, 0.0}, {-1.0, 0.0, 0.0});
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  }
  const auto features = angular_features(g);
  if (d == 2) {
    std::vector<double> breaks;
    for (const auto& f : features) {
      const double phi = std::atan2(f.direction[1], f.direction[0]);
      for (double p : {phi - f.half_angle, phi, phi + f.half_angle}) breaks.push_back(wrap_angle(p));
    }
    return azimuth_integral(
        [&](double phi) {
          const Point n{std::cos(phi), std::sin(phi), 0.0};
          return densities(g, {rho * n[0], rho * n[1], 0.0}, n);
        },
        breaks, st);
  }
  // d = 3: adaptive in mu = cos(theta) and in the azimuth.
  std::vector<double> mu_breaks;
  for (const auto& f : features) {
    const double theta = std::acos(std::clamp(f.direction[2], -1.0, 1.0));
    for (double th : {theta - f.half_angle, theta, theta + f.half_angle})
      if (th > 0.0 && th < kPi) mu_breaks.push_back(std::cos(th));
  }
  const auto r = integrate_n<3>(
      [&](double mu) {
        const double sn = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        std::vector<double> breaks;
        for (const auto& f : features) {
          const double phi = std::atan2(f.direction[1], f.direction[0]);
          const double spread = sn > 0.0 ? std::min(kPi, f.half_angle / sn) : kPi;
          for (double p : {phi - spread, phi, phi + spread}) breaks.push_back(wrap_angle(p));
        }
        return azimuth_integral(
            [&](double phi) {
              const Point n{sn * std::cos(phi), sn * std::sin(phi), mu};
              return densities(g, {rho * n[0], rho * n[1], rho * n[2]}, n);
            },
            breaks, st);
      },
      -1.0, 1.0, mu_breaks, st.inner);
  st.note(r);
  return r.value;
}

// Radial extent and breakpoints of the data.
struct RadialSupport {
  double lo = 0.0, hi = 0.0;
  std::vector<double> breaks;
};

RadialSupport radial_support(const InitialData& g) {
  RadialSupport rs;
  bool first = true;
  for (const BumpSum* sum : {&g.g0, &g.g1}) {
    for (const auto& b : sum->terms) {
      double c2 = 0.0, w = 0.0;
      for (int k = 0; k < g.dimension; ++k) {
        c2 += b.center[k] * b.center[k];
        w = std::max(w, b.width[k]);
      }
      const double c = std::sqrt(c2);
      const double lo = std::max(0.0, c - w), hi = c + w;
      rs.lo = first ? lo : std::min(rs.lo, lo);
      rs.hi = first ? hi : std::max(rs.hi, hi);
      first = false;
      rs.breaks.insert(rs.breaks.end(), {lo, c, hi});
    }
  }
  return rs;
}

std::vector<double> axis_breaks(const InitialData& g) {
  std::vector<double> out;
  for (const BumpSum* sum : {&g.g0, &g.g1})
    for (const auto& b : sum->terms)
      out.insert(out.end(), {b.center[0] - b.width[0], b.center[0], b.center[0] + b.width[0]});
  return out;
}

QuadratureResult finish(const QuadratureResult& outer, const SliceStats& st) {
  QuadratureResult r = outer;
  r.error += st.max_rel * std::abs(outer.value);
  return r;
}

// The outer integrand carries the noise of the slice integrals.
QuadratureOptions outer_options(const QuadratureOptions& opt) {
  QuadratureOptions o = opt;
  o.noise_floor = std::max(o.noise_floor, 1e-11);
  return o;
}

void require_massless(const InitialData& g) {
  if (g.mass != 0.0)
    throw Error(ErrorCode::MassNotZero, "double-cone entropy is defined for m = 0 only");
}

}  // namespace

double BumpFunction::value(const Point& x, int d) const {
  const double s2 = bump_arg(*this, x, d);
  if (s2 >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - s2));
}

double BumpFunction::value_gradient(const Point& x, int d, Point& grad) const {
  grad = Point{};
  const double s2 = bump_arg(*this, x, d);
  if (s2 >= 1.0) return 0.0;
  const double q = 1.0 / (1.0 - s2);
  const double v = amplitude * std::exp(1.0 - q);
  for (int k = 0; k < d; ++k) grad[k] = -v * q * q * 2.0 * (x[k] - center[k]) / (width[k] * width[k]);
  return v;
}

double BumpSum::value(const Point& x, int d) const {
  double v = 0.0;
  for (const auto& b : terms) v += b.value(x, d);
  return v;
}

double BumpSum::value_gradient(const Point& x, int d, Point& grad) const {
  grad = Point{};
  double v = 0.0;
  Point gk{};
  for (const auto& b : terms) {
    v += b.value_gradient(x, d, gk);
    for (int k = 0; k < d; ++k) grad[k] += gk[k];
  }
  return v;
}

Box BumpSum::bounding_box(int d) const {
  Box box;
  for (const auto& b : terms) {
    for (int k = 0; k < d; ++k) {
      const double lo = b.center[k] - b.width[k], hi = b.center[k] + b.width[k];
      box.lo[k] = box.empty ? lo : std::min(box.lo[k], lo);
      box.hi[k] = box.empty ? hi : std::max(box.hi[k], hi);
    }
    box.empty = false;
  }
  return box;
}

void InitialData::validate() const {
  if (dimension < 1 || dimension > 3)
    throw Error(ErrorCode::DomainViolation, "dimension must be 1, 2 or 3");
  if (!(mass >= 0.0)) throw Error(ErrorCode::DomainViolation, "mass must be nonnegative");
  for (const BumpSum* sum : {&g0, &g1})
    for (const auto& b : sum->terms)
      for (int k = 0; k < dimension; ++k)
        if (!(b.width[k] > 0.0))
          throw Error(ErrorCode::DomainViolation, "bump widths must be positive");
}

Box InitialData::support_box() const {
  Box a = g0.bounding_box(dimension);
  const Box b = g1.bounding_box(dimension);
  if (a.empty) return b;
  if (b.empty) return a;
  for (int k = 0; k < dimension; ++k) {
    a.lo[k] = std::min(a.lo[k], b.lo[k]);
    a.hi[k] = std::max(a.hi[k], b.hi[k]);
  }
  return a;
}

double InitialData::energy_density(const Point& x) const {
  return densities(*this, x, {1.0, 0.0, 0.0})[0];
}

double Region::weight(const Point& x, int d) const {
  if (kind == Kind::wedge) return x[0] - offset;
  double r2 = 0.0;
  for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
  return (radius * radius - r2) / (2.0 * radius);
}

QuadratureOptions inner_quadrature_options(const InitialData& g) {
  double amp = 0.0;
  for (const BumpSum* sum : {&g.g0, &g.g1})
    for (const auto& b : sum->terms) amp = std::max(amp, std::abs(b.amplitude));
  QuadratureOptions o;
  o.rel_tol = 1e-13;
  // Slices far out in a bump's tail are only needed to an absolute accuracy
  // negligible against amplitude^2; there the bump is also noisiest.
  o.abs_tol = std::max(1e-250, 1e-20 * amp * amp);
  // Near the edge of its support a bump loses about three digits to the
  // cancellation in 1 - s^2, which sets the attainable panel accuracy.
  o.noise_floor = 1e-12;
  o.shared_scale = true;
  o.min_depth = 0;
  return o;
}

QuadratureResult weighted_entropy(const InitialData& g, const Region& region,
                                  const QuadratureOptions& opt) {
  g.validate();
  const Box box = g.support_box();
  if (box.empty) return {};
  SliceStats st(g);
  if (region.kind == Region::Kind::wedge) {
    const double a = std::max(box.lo[0], region.offset);
    const auto outer = integrate(
        [&](double x1) { return 0.5 * kPi * (x1 - region.offset) * wedge_slice_at(g, x1, st)[0]; },
        a, box.hi[0], axis_breaks(g), outer_options(opt));
    return finish(outer, st);
  }
  require_massless(g);
  const double r = region.radius;
  if (!(r > 0.0)) throw Error(ErrorCode::GeometryViolation, "ball radius must be positive");
  const RadialSupport rs = radial_support(g);
  const int d = g.dimension;
  const auto outer = integrate(
      [&](double rho) {
        const Triple v = sphere_slice(g, rho, st);
        const double beta = (r * r - rho * rho) / (2.0 * r);
        return 0.5 * kPi * std::pow(rho, d - 1) * (beta * v[0] + (d - 1) / (2.0 * r) * v[2]);
      },
      rs.lo, std::min(rs.hi, r), rs.breaks, outer_options(opt));
  return finish(outer, st);
}

QuadratureResult field_energy(const InitialData& g, const QuadratureOptions& opt) {
  g.validate();
  const Box box = g.support_box();
  if (box.empty) return {};
  SliceStats st(g);
  const auto outer = integrate([&](double x1) { return wedge_slice_at(g, x1, st)[0]; }, box.lo[0],
                               box.hi[0], axis_breaks(g), outer_options(opt));
  return finish(outer, st);
}

QuadratureResult exact_entropy_wedge(const InitialData& g, const QuadratureOptions& opt) {
  return weighted_entropy(g, Region::wedge(0.0), opt);
}

QuadratureResult exact_entropy_cone(const InitialData& g, double r, const QuadratureOptions& opt) {
  require_massless(g);
  return weighted_entropy(g, Region::ball(r), opt);
}

QuadratureResult exact_entropy(const InitialData& g, const Geometry& geo,
                               const QuadratureOptions& opt) {
  return geo.kind == Geometry::Kind::wedge ? exact_entropy_wedge(g, opt)
                                           : exact_entropy_cone(g, geo.radius, opt);
}

QuadratureResult entropy_bound(const InitialData& g, const Geometry& geo, Side side,
                               const CutoffProfile& eta_plus, double epsilon,
                               const QuadratureOptions& opt) {
  g.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::GeometryViolation, "epsilon must be positive");
  if (eta_plus.is_reflected())
    throw Error(ErrorCode::GeometryViolation, "pass the upper transition; the lower one is derived");
  if (geo.kind == Geometry::Kind::cone) {
    require_massless(g);
    if (!(geo.radius > 0.0) || !(2.0 * epsilon < geo.radius))
      throw Error(ErrorCode::GeometryViolation, "cone bounds need 0 < 2 epsilon < r");
  }
  const Box box = g.support_box();
  if (box.empty) return {};

  const double sigma = side == Side::upper ? 1.0 : -1.0;
  const CutoffProfile prof = side == Side::upper ? eta_plus : eta_plus.reflected();
  // eta and its derivative in the transition variable u.
  auto cutoff = [&](double u) -> std::pair<double, double> {
    if (u >= 1.0) return {1.0, 0.0};
    if (u <= -1.0) return {0.0, 0.0};
    return {prof.eta(u), prof.derivative(u)};
  };
  SliceStats st(g);

  if (geo.kind == Geometry::Kind::wedge) {
    std::vector<double> breaks = axis_breaks(g);
    for (double u : prof.breakpoints()) breaks.push_back(epsilon * (u - sigma));
    const double a = std::max(box.lo[0], epsilon * (-1.0 - sigma));
    const auto outer = integrate(
        [&](double x1) {
          const auto [eta, deta] = cutoff(x1 / epsilon + sigma);
          if (eta == 0.0 && deta == 0.0) return 0.0;
          const Triple v = wedge_slice_at(g, x1, st);
          const double dx = deta / epsilon;
          const double beta = x1 + sigma * 2.0 * epsilon;
          return 0.5 * kPi * beta * (eta * eta * v[0] + 2.0 * eta * dx * v[1] + dx * dx * v[2]);
        },
        a, box.hi[0], breaks, outer_options(opt));
    return finish(outer, st);
  }

  const double r = geo.radius;
  const double rs_side = r + sigma * 2.0 * epsilon;
  const int d = g.dimension;
  RadialSupport rs = radial_support(g);
  for (double u : prof.breakpoints()) rs.breaks.push_back(r - epsilon * (u - sigma));
  const double hi = std::min(rs.hi, r - epsilon * (-1.0 - sigma));
  const auto outer = integrate(
      [&](double rho) {
        const auto [eta, deta] = cutoff((r - rho) / epsilon + sigma);
        if (eta == 0.0 && deta == 0.0) return 0.0;
        const Triple v = sphere_slice(g, rho, st);
        const double dr = -deta / epsilon;
        const double beta = (rs_side * rs_side - rho * rho) / (2.0 * rs_side);
        const double body = beta * (eta * eta * v[0] + 2.0 * eta * dr * v[1] + dr * dr * v[2]) +
                            (d - 1) / (2.0 * rs_side) * eta * eta * v[2];
        return 0.5 * kPi * std::pow(rho, d - 1) * body;
      },
      rs.lo, hi, rs.breaks, outer_options(opt));
  return finish(outer, st);
}

std::function<double(double)> tau0(const InitialData& g, const Geometry& geo) {
  g.validate();
  if (geo.kind == Geometry::Kind::wedge) {
    return [g](double x1) {
      SliceStats st(g);
      return wedge_slice_at(g, x1, st)[2];
    };
  }
  return [g](double rho) {
    SliceStats st(g);
    return sphere_slice(g, rho, st)[2];
  };
}

double boundary_term_prediction(const InitialData& g, const Geometry& geo,
                                const CutoffProfile& eta_plus, Side side) {
  const double e = side == Side::upper ? energy(eta_plus).value
                                       : reflected_energy(eta_plus.reflected()).value;
  const double sigma = side == Side::upper ? 1.0 : -1.0;
  const auto tau = tau0(g, geo);
  if (geo.kind == Geometry::Kind::wedge) return sigma * 0.5 * kPi * tau(0.0) * e;
  const double r = geo.radius;
  return sigma * 0.5 * kPi * tau(r) * std::pow(r, g.dimension - 1) * e;
}

std::vector<BoundSweepRecord> squeeze_sweep(const InitialData& g, const Geometry& geo,
                                            const std::vector<ScheduleEntry>& schedule,
                                            const QuadratureOptions& opt) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& e = schedule[i];
    if (!(e.s > 1.0) || !(e.t >= e.s / (e.s - 1.0)))
      throw Error(ErrorCode::ScheduleViolation,
                  "schedule entry " + std::to_string(i) + ": need s > 1 and t >= s/(s-1)");
    if (!(e.epsilon > 0.0) || (i > 0 && e.epsilon > schedule[i - 1].epsilon))
      throw Error(ErrorCode::ScheduleViolation,
                  "schedule entry " + std::to_string(i) + ": epsilon must be positive and non-increasing");
  }
  std::vector<BoundSweepRecord> out;
  if (schedule.empty()) return out;
  const auto exact = exact_entropy(g, geo, opt);
  for (const auto& e : schedule) {
    const CutoffProfile prof = eta_st(e.s, e.t);
    const auto hp = entropy_bound(g, geo, Side::upper, prof, e.epsilon, opt);
    const auto hm = entropy_bound(g, geo, Side::lower, prof, e.epsilon, opt);
    BoundSweepRecord rec;
    rec.epsilon = e.epsilon;
    rec.s = e.s;
    rec.t = e.t;
    rec.H_minus = hm.value;
    rec.H_exact = exact.value;
    rec.H_plus = hp.value;
    rec.quad_error_estimate = hm.error + exact.error + hp.error;
    out.push_back(rec);
  }
  return out;
}

FlowPoint modular_flow_point(const Geometry& geo, double s, const SpacetimePoint& x, int d) {
  if (d < 1 || d > 3) throw Error(ErrorCode::DomainViolation, "dimension must be 1, 2 or 3");
  FlowPoint out;
  out.x = x;
  const double ch = std::cosh(s), sh = std::sinh(s);
  if (geo.kind == Geometry::Kind::wedge) {
    out.x[0] = x[0] * ch + x[1] * sh;
    out.x[1] = x[0] * sh + x[1] * ch;
    return out;
  }
  const double r = geo.radius;
  double x2 = -x[0] * x[0];
  for (int k = 1; k <= d; ++k) x2 += x[k] * x[k];
  const double n = x[0] / r * sh + (r * r - x2) / (2.0 * r * r) * ch + (r * r + x2) / (2.0 * r * r);
  if (!(n > 0.0)) throw Error(ErrorCode::FlowSingularity, "conformal flow leaves its chart (N <= 0)");
  out.x[0] = (x[0] * ch + (r * r - x2) / (2.0 * r) * sh) / n;
  for (int k = 1; k <= d; ++k) out.x[k] = x[k] / n;
  out.jacobian = std::pow(n, 0.5 * (1 - d));
  return out;
}

}  // namespace relmod
