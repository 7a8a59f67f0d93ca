#pragma once

// Adaptive composite Gauss-Legendre quadrature.  Each panel is integrated at
// orders 10 and 14; the difference is the local error estimate and panels are
// bisected until it meets a tolerance proportional to the panel length.
// Integrands may be vector valued (std::array) so that several related
// integrals share one set of nodes.

#include "relmod/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <vector>

namespace relmod {

struct QuadratureOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-15;
  int max_depth = 48;
  // Panels are bisected at least this many times before the error test applies,
  // so features narrower than one panel cannot hide between the nodes.
  int min_depth = 1;
  std::size_t max_evaluations = 50'000'000;
  // A panel is also accepted once its error estimate is below this fraction of
  // its integral of |f|: below that level the estimate measures evaluation
  // noise of the integrand, not truncation error.
  double noise_floor = 64.0 * std::numeric_limits<double>::epsilon();
  // Vector integrands: measure tolerances and the noise floor against the
  // largest component, for components that are combined into one quantity.
  bool shared_scale = false;
  // Depth beyond which a panel is accepted once its error is below abs_tol.
  int noise_depth = 30;
};

template <std::size_t N>
struct QuadratureResultN {
  std::array<double, N> value{};
  double error = 0.0;  // max over components
  std::size_t evaluations = 0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

template <unsigned P>
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
  GaussRule() {
    using rule = boost::math::quadrature::gauss<double, P>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x.push_back(0.0);
        w.push_back(wt[i]);
      } else {
        x.push_back(a[i]);
        w.push_back(wt[i]);
        x.push_back(-a[i]);
        w.push_back(wt[i]);
      }
    }
  }
};

template <unsigned P>
const GaussRule<P>& rule() {
  static const GaussRule<P> r;
  return r;
}

template <std::size_t N, class F>
std::array<double, N> apply_rule(const std::vector<double>& x, const std::vector<double>& w,
                                 const F& f, double a, double b,
                                 std::array<double, N>* abs_acc = nullptr) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::array<double, N> acc{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::array<double, N> v = f(mid + half * x[i]);
    for (std::size_t k = 0; k < N; ++k) {
      acc[k] += w[i] * v[k];
      if (abs_acc) (*abs_acc)[k] += half * w[i] * std::abs(v[k]);
    }
  }
  for (auto& v : acc) v *= half;
  return acc;
}

template <std::size_t N>
struct PanelEstimate {
  std::array<double, N> low{};
  std::array<double, N> high{};
  std::array<double, N> magnitude{};  // integral of |f|, for the rounding floor
};

template <std::size_t N, class F>
PanelEstimate<N> estimate(const F& f, double a, double b, std::size_t& evals) {
  PanelEstimate<N> p;
  p.low = apply_rule<N>(rule<10>().x, rule<10>().w, f, a, b);
  p.high = apply_rule<N>(rule<14>().x, rule<14>().w, f, a, b, &p.magnitude);
  evals += rule<10>().x.size() + rule<14>().x.size();
  return p;
}

template <std::size_t N, class F>
void refine(const F& f, double a, double b, const PanelEstimate<N>& est,
            const std::array<double, N>& tol_density, int depth, const QuadratureOptions& opt,
            QuadratureResultN<N>& out) {
  bool ok = depth >= opt.min_depth;
  double err = 0.0;
  double magnitude = 0.0;
  for (std::size_t k = 0; k < N; ++k) magnitude = std::max(magnitude, est.magnitude[k]);
  for (std::size_t k = 0; k < N; ++k) {
    const double e = std::abs(est.high[k] - est.low[k]);
    err = std::max(err, e);
    const double floor = opt.noise_floor * (opt.shared_scale ? magnitude : est.magnitude[k]);
    if (e > std::max(tol_density[k] * (b - a), floor)) ok = false;
  }
  // Deep panels whose error is already below the absolute tolerance are kept
  // (their error is still accounted); refining them further only chases noise.
  if (!ok && depth >= opt.noise_depth && err <= opt.abs_tol) ok = true;
  if (ok) {
    for (std::size_t k = 0; k < N; ++k) out.value[k] += est.high[k];
    out.error += err;
    return;
  }
  if (depth >= opt.max_depth || out.evaluations > opt.max_evaluations) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "adaptive quadrature: budget exhausted on [%.17g, %.17g] at depth %d after %zu evaluations, err %.3g", a,
                  b, depth, out.evaluations, err);
    throw Error(ErrorCode::QuadratureBudgetExceeded, msg);
  }
  const double m = 0.5 * (a + b);
  const auto left = estimate<N>(f, a, m, out.evaluations);
  const auto right = estimate<N>(f, m, b, out.evaluations);
  refine<N>(f, a, m, left, tol_density, depth + 1, opt, out);
  refine<N>(f, m, b, right, tol_density, depth + 1, opt, out);
}

}  // namespace detail

/// Integrates f over [a, b], splitting first at every breakpoint inside (a, b).
template <std::size_t N, class F>
QuadratureResultN<N> integrate_n(const F& f, double a, double b, std::vector<double> breaks = {},
                                 const QuadratureOptions& opt = {}) {
  QuadratureResultN<N> out;
  if (!(b > a)) return out;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> edges;
  for (double x : breaks)
    if (x >= a && x <= b && (edges.empty() || x > edges.back())) edges.push_back(x);

  std::vector<detail::PanelEstimate<N>> first;
  std::array<double, N> total{};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    first.push_back(detail::estimate<N>(f, edges[i], edges[i + 1], out.evaluations));
    for (std::size_t k = 0; k < N; ++k) total[k] += std::abs(first.back().high[k]);
  }
  if (opt.shared_scale) total.fill(*std::max_element(total.begin(), total.end()));
  std::array<double, N> density{};
  for (std::size_t k = 0; k < N; ++k)
    density[k] = std::max(opt.abs_tol, opt.rel_tol * total[k]) / (b - a);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    detail::refine<N>(f, edges[i], edges[i + 1], first[i], density, 0, opt, out);
  return out;
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, std::vector<double> breaks = {},
                           const QuadratureOptions& opt = {}) {
  const auto r = integrate_n<1>([&f](double x) { return std::array<double, 1>{f(x)}; }, a, b,
                                std::move(breaks), opt);
  return QuadratureResult{r.value[0], r.error, r.evaluations};
}

}  // namespace relmod
