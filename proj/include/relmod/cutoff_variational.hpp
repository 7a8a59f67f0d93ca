#pragma once

// Cutoff transitions eta: [-1, 1] -> [0, 1] with eta = 0 left of -1 and 1 right
// of +1, the energy E[eta] = int (x + 1) eta'(x)^2 dx, the smoothed family
// eta_{s,t} = int X_s(x - y/t) f(y) dy and a discrete minimiser of E.

#include "relmod/matrix_engine.hpp"
#include "relmod/quadrature.hpp"

#include <memory>
#include <vector>

namespace relmod {

/// Normalised standard bump on [-1, 1].
double mollifier(double y);

/// chi_s(u) = 1 / (c_s (u + 1)) on |u| < 1/s, zero elsewhere, and its antiderivative.
class ChiKernel {
 public:
  explicit ChiKernel(double s);
  double s() const { return s_; }
  double c_s() const { return c_s_; }
  double chi(double u) const;
  double antiderivative(double u) const;

 private:
  double s_;
  double c_s_;
};

class CutoffProfile {
 public:
  enum class Kind { analytic, discrete };

  Kind kind() const { return kind_; }
  double eta(double x) const;
  double derivative(double x) const;
  /// Points in [-1, 1] where eta' changes character (panel edges for quadrature).
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// x -> 1 - eta(-x), again a transition from 0 to 1.
  CutoffProfile reflected() const;

  bool is_reflected() const { return reflected_; }
  double s() const { return s_; }
  double t() const { return t_; }
  const RVector& grid_values() const { return values_; }

  static CutoffProfile analytic(double s, double t);
  /// Piecewise linear through values on the uniform grid of [-1, 1];
  /// the endpoint values must be 0 and 1.
  static CutoffProfile discrete(const RVector& values);

 private:
  CutoffProfile() = default;
  double eta_raw(double x) const;
  double derivative_raw(double x) const;

  Kind kind_ = Kind::analytic;
  bool reflected_ = false;
  double s_ = 0.0, t_ = 0.0;
  std::shared_ptr<const ChiKernel> kernel_;
  RVector values_;
  std::vector<double> breaks_;
};

/// eta_{s,t}; requires s > 1 and t >= s / (s - 1).
CutoffProfile eta_st(double s, double t);

/// int_{-1}^{1} (x + 1) eta'(x)^2 dx.  Discrete profiles are integrated exactly.
QuadratureResult energy(const CutoffProfile& eta, const QuadratureOptions& opt = {});

/// int_{-1}^{1} (1 - x) eta'(x)^2 dx, the energy seen by a reflected profile.
QuadratureResult reflected_energy(const CutoffProfile& eta, const QuadratureOptions& opt = {});

/// 1 / log((s + 1) / (s - 1)), the t -> infinity limit of E[eta_{s,t}].
double energy_limit(double s);

/// 2 s^2 / (c_s^2 (s - 1)^2), a bound on E[eta_{s,t}] uniform in t.
double energy_dominating_bound(double s);

struct DiscreteMinimum {
  RVector grid;
  RVector values;
  double minimum = 0.0;
  CutoffProfile profile() const { return CutoffProfile::discrete(values); }
};

/// Minimises sum_i (x_i + 1 + h/2) (eta_{i+1} - eta_i)^2 / h with eta pinned to
/// 0 and 1 at the ends, via the tridiagonal normal equations.
DiscreteMinimum minimize_discrete(int n_grid);

/// The closed form 1 / sum_i h / (x_i + 1 + h/2) of the discrete minimum.
double discrete_minimum_closed_form(int n_grid);

}  // namespace relmod
