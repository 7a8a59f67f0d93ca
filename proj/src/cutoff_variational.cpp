#include "relmod/cutoff_variational.hpp"

#include "relmod/errors.hpp"

#include <cmath>
#include <sstream>

namespace relmod {

namespace {

double raw_bump(double y) {
  const double q = 1.0 - y * y;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

double bump_mass() {
  static const double mass = [] {
    QuadratureOptions opt;
    opt.rel_tol = 1e-14;
    return integrate(raw_bump, -1.0, 1.0, {0.0}, opt).value;
  }();
  return mass;
}

QuadratureOptions inner_options() {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-16;
  opt.min_depth = 0;
  return opt;
}

}  // namespace

double mollifier(double y) { return raw_bump(y) / bump_mass(); }

ChiKernel::ChiKernel(double s) : s_(s) {
  if (!(s > 1.0)) throw Error(ErrorCode::ParameterViolation, "ChiKernel: s must exceed 1");
  c_s_ = std::log((s + 1.0) / (s - 1.0));
}

double ChiKernel::chi(double u) const {
  if (std::abs(u) >= 1.0 / s_) return 0.0;
  return 1.0 / (c_s_ * (u + 1.0));
}

double ChiKernel::antiderivative(double u) const {
  if (u <= -1.0 / s_) return 0.0;
  if (u >= 1.0 / s_) return 1.0;
  return (std::log(u + 1.0) - std::log(1.0 - 1.0 / s_)) / c_s_;
}

CutoffProfile CutoffProfile::analytic(double s, double t) {
  if (!(s > 1.0)) throw Error(ErrorCode::ParameterViolation, "eta_st: s must exceed 1");
  if (!(t >= s / (s - 1.0))) {
    std::ostringstream msg;
    msg << "eta_st: t = " << t << " is below s/(s-1) = " << s / (s - 1.0);
    throw Error(ErrorCode::ParameterViolation, msg.str());
  }
  CutoffProfile p;
  p.kind_ = Kind::analytic;
  p.s_ = s;
  p.t_ = t;
  p.kernel_ = std::make_shared<const ChiKernel>(s);
  const double a = 1.0 / s, b = 1.0 / t;
  p.breaks_ = {-1.0, -a - b, -a + b, a - b, a + b, 1.0};
  std::sort(p.breaks_.begin(), p.breaks_.end());
  return p;
}

CutoffProfile CutoffProfile::discrete(const RVector& values) {
  if (values.size() < 3)
    throw Error(ErrorCode::ParameterViolation, "discrete profile: need at least 3 grid values");
  if (values(0) != 0.0 || values(values.size() - 1) != 1.0)
    throw Error(ErrorCode::ParameterViolation, "discrete profile: endpoints must be 0 and 1");
  CutoffProfile p;
  p.kind_ = Kind::discrete;
  p.values_ = values;
  const Eigen::Index n = values.size();
  for (Eigen::Index i = 0; i < n; ++i) p.breaks_.push_back(-1.0 + 2.0 * double(i) / double(n - 1));
  return p;
}

CutoffProfile CutoffProfile::reflected() const {
  CutoffProfile p = *this;
  p.reflected_ = !reflected_;
  for (double& b : p.breaks_) b = -b;
  std::sort(p.breaks_.begin(), p.breaks_.end());
  return p;
}

double CutoffProfile::eta_raw(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (kind_ == Kind::discrete) {
    const Eigen::Index n = values_.size();
    const double h = 2.0 / double(n - 1);
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>((x + 1.0) / h), n - 2);
    const double x0 = -1.0 + double(i) * h;
    return values_(i) + (values_(i + 1) - values_(i)) * (x - x0) / h;
  }
  const double inv_s = 1.0 / s_;
  if (x <= -inv_s - 1.0 / t_) return 0.0;
  if (x >= inv_s + 1.0 / t_) return 1.0;
  const ChiKernel& k = *kernel_;
  const double t = t_;
  auto integrand = [&](double y) { return k.antiderivative(x - y / t) * mollifier(y); };
  return integrate(integrand, -1.0, 1.0, {t * (x - inv_s), t * (x + inv_s)}, inner_options()).value;
}

double CutoffProfile::derivative_raw(double x) const {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  if (kind_ == Kind::discrete) {
    const Eigen::Index n = values_.size();
    const double h = 2.0 / double(n - 1);
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>((x + 1.0) / h), n - 2);
    return (values_(i + 1) - values_(i)) / h;
  }
  const double inv_s = 1.0 / s_;
  if (std::abs(x) >= inv_s + 1.0 / t_) return 0.0;
  const ChiKernel& k = *kernel_;
  const double t = t_;
  // y ranges where |x - y/t| < 1/s.
  const double lo = std::max(-1.0, t * (x - inv_s));
  const double hi = std::min(1.0, t * (x + inv_s));
  auto integrand = [&](double y) { return k.chi(x - y / t) * mollifier(y); };
  return integrate(integrand, lo, hi, {}, inner_options()).value;
}

double CutoffProfile::eta(double x) const {
  return reflected_ ? 1.0 - eta_raw(-x) : eta_raw(x);
}

double CutoffProfile::derivative(double x) const {
  return reflected_ ? derivative_raw(-x) : derivative_raw(x);
}

CutoffProfile eta_st(double s, double t) { return CutoffProfile::analytic(s, t); }

namespace {

QuadratureResult weighted_energy(const CutoffProfile& eta, double sign,
                                 const QuadratureOptions& opt) {
  if (eta.kind() == CutoffProfile::Kind::discrete) {
    // Exact integral of the piecewise constant derivative against 1 + sign x.
    const RVector& v = eta.grid_values();
    const Eigen::Index n = v.size();
    const double h = 2.0 / double(n - 1);
    // Reflection maps the weight 1 + sign x to 1 - sign x.
    if (eta.is_reflected()) sign = -sign;
    double e = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double xm = -1.0 + (double(i) + 0.5) * h;
      const double slope = (v(i + 1) - v(i)) / h;
      e += slope * slope * h * (1.0 + sign * xm);
    }
    return QuadratureResult{e, 0.0, static_cast<std::size_t>(n)};
  }
  auto integrand = [&](double x) {
    const double d = eta.derivative(x);
    return (1.0 + sign * x) * d * d;
  };
  return integrate(integrand, -1.0, 1.0, eta.breakpoints(), opt);
}

}  // namespace

QuadratureResult energy(const CutoffProfile& eta, const QuadratureOptions& opt) {
  return weighted_energy(eta, 1.0, opt);
}

QuadratureResult reflected_energy(const CutoffProfile& eta, const QuadratureOptions& opt) {
  return weighted_energy(eta, -1.0, opt);
}

double energy_limit(double s) {
  if (!(s > 1.0)) throw Error(ErrorCode::ParameterViolation, "energy_limit: s must exceed 1");
  return 1.0 / std::log((s + 1.0) / (s - 1.0));
}

double energy_dominating_bound(double s) {
  const ChiKernel k(s);
  return 2.0 * s * s / (k.c_s() * k.c_s() * (s - 1.0) * (s - 1.0));
}

DiscreteMinimum minimize_discrete(int n_grid) {
  if (n_grid < 3) throw Error(ErrorCode::ParameterViolation, "minimize_discrete: n_grid >= 3");
  const Eigen::Index n = n_grid;
  const double h = 2.0 / double(n - 1);
  RVector x(n), w(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = -1.0 + double(i) * h;
  for (Eigen::Index i = 0; i + 1 < n; ++i) w(i) = x(i) + 1.0 + 0.5 * h;

  // Unknowns eta_1 .. eta_{n-2}: -w_{j-1} eta_{j-1} + (w_{j-1} + w_j) eta_j - w_j eta_{j+1} = 0.
  const Eigen::Index m = n - 2;
  RVector diag(m), upper(m), rhs = RVector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    diag(j) = w(j) + w(j + 1);
    upper(j) = -w(j + 1);
  }
  rhs(m - 1) = w(m);  // eta_{n-1} = 1 moved to the right-hand side
  // Thomas algorithm; the matrix is symmetric with lower = upper shifted.
  for (Eigen::Index j = 1; j < m; ++j) {
    if (!(diag(j - 1) > 0.0)) throw Error(ErrorCode::SingularSystem, "minimize_discrete: pivot");
    const double f = upper(j - 1) / diag(j - 1);
    diag(j) -= f * upper(j - 1);
    rhs(j) -= f * rhs(j - 1);
  }
  if (!(diag(m - 1) > 0.0)) throw Error(ErrorCode::SingularSystem, "minimize_discrete: pivot");
  RVector sol(m);
  sol(m - 1) = rhs(m - 1) / diag(m - 1);
  for (Eigen::Index j = m - 2; j >= 0; --j) sol(j) = (rhs(j) - upper(j) * sol(j + 1)) / diag(j);

  DiscreteMinimum out;
  out.grid = x;
  out.values.resize(n);
  out.values(0) = 0.0;
  out.values.segment(1, m) = sol;
  out.values(n - 1) = 1.0;
  double e = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double d = out.values(i + 1) - out.values(i);
    e += w(i) * d * d / h;
  }
  out.minimum = e;
  return out;
}

double discrete_minimum_closed_form(int n_grid) {
  if (n_grid < 3) throw Error(ErrorCode::ParameterViolation, "discrete_minimum: n_grid >= 3");
  const double h = 2.0 / double(n_grid - 1);
  double sum = 0.0;
  for (int i = 0; i + 1 < n_grid; ++i) sum += h / (-1.0 + i * h + 1.0 + 0.5 * h);
  return 1.0 / sum;
}

}  // namespace relmod
