#pragma once

// Free scalar field in d = 1, 2, 3 space dimensions.  Initial data are sums of
// smooth bumps; entropies are local quadratic forms integrated by adaptive
// Gauss-Legendre quadrature.  Weights and cutoffs depend on one coordinate only
// (x^1 for wedges, the radius for balls), so the integrals are computed as an
// outer one-dimensional integral of slice integrals over the other directions.

#include "relmod/cutoff_variational.hpp"
#include "relmod/quadrature.hpp"

#include <array>
#include <functional>
#include <vector>

namespace relmod {

using Point = std::array<double, 3>;

struct BumpFunction {
  Point center{};
  Point width{1.0, 1.0, 1.0};
  double amplitude = 1.0;

  double value(const Point& x, int d) const;
  /// Value, writing the analytic gradient into grad.
  double value_gradient(const Point& x, int d, Point& grad) const;
};

struct Box {
  Point lo{};
  Point hi{};
  bool empty = true;
};

struct BumpSum {
  std::vector<BumpFunction> terms;

  bool empty() const { return terms.empty(); }
  double value(const Point& x, int d) const;
  double value_gradient(const Point& x, int d, Point& grad) const;
  Box bounding_box(int d) const;
};

struct InitialData {
  int dimension = 1;
  double mass = 0.0;
  BumpSum g0;
  BumpSum g1;

  /// Throws DomainViolation on d outside {1,2,3}, negative mass or bad widths.
  void validate() const;
  Box support_box() const;
  /// |grad g0|^2 + m^2 g0^2 + g1^2 at x.
  double energy_density(const Point& x) const;
};

struct Region {
  enum class Kind { wedge, ball };
  Kind kind = Kind::wedge;
  double offset = 0.0;  // wedge {x^1 > offset}
  double radius = 1.0;  // ball {|x| < radius}

  static Region wedge(double offset) { return {Kind::wedge, offset, 1.0}; }
  static Region ball(double radius) { return {Kind::ball, 0.0, radius}; }
  /// x^1 - offset, or (r^2 - |x|^2) / (2r).
  double weight(const Point& x, int d) const;
};

/// Geometry of the middle region: the wedge {x^1 > 0} or the ball of radius r.
struct Geometry {
  enum class Kind { wedge, cone };
  Kind kind = Kind::wedge;
  double radius = 1.0;

  static Geometry wedge() { return {Kind::wedge, 1.0}; }
  static Geometry cone(double r) { return {Kind::cone, r}; }
};

enum class Side { upper, lower };

struct BoundSweepRecord {
  double epsilon = 0.0;
  double s = 0.0;
  double t = 0.0;
  double H_minus = 0.0;
  double H_exact = 0.0;
  double H_plus = 0.0;
  double quad_error_estimate = 0.0;
  double gap() const { return H_plus - H_minus; }
};

struct ScheduleEntry {
  double epsilon = 0.0;
  double s = 0.0;
  double t = 0.0;
};

/// Options for the slice integrals, which are nested inside the outer integral
/// and therefore run tighter.
QuadratureOptions inner_quadrature_options(const InitialData& g);

/// (pi/2) int_{x^1 > 0} x^1 (|grad g0|^2 + m^2 g0^2 + g1^2).
QuadratureResult exact_entropy_wedge(const InitialData& g, const QuadratureOptions& opt = {});

/// (pi/2) int_{|x| < r} [beta (|grad g0|^2 + g1^2) + (d-1)/(2r) g0^2], massless only.
QuadratureResult exact_entropy_cone(const InitialData& g, double r,
                                    const QuadratureOptions& opt = {});

QuadratureResult exact_entropy(const InitialData& g, const Geometry& geo,
                               const QuadratureOptions& opt = {});

/// int (|grad g0|^2 + m^2 g0^2 + g1^2) over all of R^d.
QuadratureResult field_energy(const InitialData& g, const QuadratureOptions& opt = {});

/// (pi/2) int weight * density over the data with the weight of `region`
/// (no cutoff).  The cone form includes the (d-1)/(2r) term.
QuadratureResult weighted_entropy(const InitialData& g, const Region& region,
                                  const QuadratureOptions& opt = {});

/// H^+ (side upper) or H^- (side lower) for the symmetric placement at
/// distance 2 epsilon.  `eta_plus` is the transition of the upper cutoff; the
/// lower one uses its reflection x -> 1 - eta_plus(-x).
QuadratureResult entropy_bound(const InitialData& g, const Geometry& geo, Side side,
                               const CutoffProfile& eta_plus, double epsilon,
                               const QuadratureOptions& opt = {});

/// Wedge: x^1 -> int g0^2 over the perpendicular coordinates.
/// Cone: rho -> int over the unit sphere of g0(rho w)^2.
std::function<double(double)> tau0(const InitialData& g, const Geometry& geo);

/// The epsilon -> 0 limit of H^{+-} - H_exact for the given cutoff family.
double boundary_term_prediction(const InitialData& g, const Geometry& geo,
                                const CutoffProfile& eta_plus, Side side);

/// Requires t >= s/(s-1), s > 1 and non-increasing epsilon.
std::vector<BoundSweepRecord> squeeze_sweep(const InitialData& g, const Geometry& geo,
                                            const std::vector<ScheduleEntry>& schedule,
                                            const QuadratureOptions& opt = {});

using SpacetimePoint = std::array<double, 4>;  // (x^0, x^1, x^2, x^3)

struct FlowPoint {
  SpacetimePoint x{};
  double jacobian = 1.0;
};

/// Wedge: the boost in the (x^0, x^1) plane with rapidity s.
/// Cone: the conformal flow T^s of the ball of radius r with factor N^{(1-d)/2}.
FlowPoint modular_flow_point(const Geometry& geo, double s, const SpacetimePoint& x, int d);

}  // namespace relmod
