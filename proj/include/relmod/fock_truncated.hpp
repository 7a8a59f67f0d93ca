#pragma once

// Bosonic Fock space over C^n truncated at N total particles.  Basis vectors
// are occupation tuples ordered by total particle number, so the sectors with
// at most k particles span a leading block of indices.

#include "relmod/findim_modular.hpp"
#include "relmod/matrix_engine.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace relmod {

inline constexpr double kDefaultChiMax = 0.5;

class TruncatedFock {
 public:
  TruncatedFock(int modes, int cutoff);

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  const std::vector<std::vector<int>>& basis() const { return basis_; }
  int degree(Eigen::Index k) const { return degree_[static_cast<std::size_t>(k)]; }
  Eigen::Index index_of(const std::vector<int>& occupation) const;

  /// Number of basis vectors with at most k particles.
  Eigen::Index sector_dim(int k) const;

  const CMatrix& annihilator(int mode) const { return ladder_[static_cast<std::size_t>(mode)]; }
  CVector vacuum() const;

 private:
  int modes_;
  int cutoff_;
  std::vector<std::vector<int>> basis_;
  std::vector<int> degree_;
  std::map<std::vector<int>, Eigen::Index> index_;
  std::vector<CMatrix> ladder_;
};

/// a(chi) = sum conj(chi_i) a_i and a^*(chi) = sum chi_i a_i^dagger.
CMatrix annihilation(const TruncatedFock& tf, const CVector& chi);
CMatrix creation(const TruncatedFock& tf, const CVector& chi);

/// (a^*(chi) + a(chi)) / sqrt 2.
CMatrix segal_field(const TruncatedFock& tf, const CVector& chi);

/// exp(i segal_field(chi)) through the Hermitian eigendecomposition.
CMatrix weyl(const TruncatedFock& tf, const CVector& chi, double chi_max = kDefaultChiMax);

/// sum h_ij a_i^dagger a_j, exact on every sector.
CMatrix dgamma(const TruncatedFock& tf, const CMatrix& h);

/// Second quantisation of a one-particle unitary, built from permanents.
CMatrix second_quantize(const TruncatedFock& tf, const CMatrix& u);

/// Permanent by Ryser's formula.
cplx permanent(const CMatrix& m);

/// Highest particle number carrying weight above `floor` (relative to ||psi||).
int particle_degree(const TruncatedFock& tf, const CVector& psi, double floor = 0.0);

/// Compression onto the sectors with at most k particles.
CMatrix compress(const TruncatedFock& tf, const CMatrix& x, int k);

struct StandardSubspaceData {
  int mode_dim = 0;
  CMatrix Delta_H;
  AntilinearMap J_H;
  CMatrix K_H;

  /// Delta = U diag(l_1, 1/l_1, l_2, 1/l_2, ..) U^dagger with J = U sigma U^T,
  /// sigma swapping each pair.  An odd trailing mode has Delta = 1 and J = conj.
  static StandardSubspaceData from_pairs(const std::vector<double>& lambdas, const CMatrix& u);

  /// S_H = J Delta^{1/2}; its fixed points form the standard subspace.
  AntilinearMap tomita() const;
  /// (x + S_H x) / 2, an element of the subspace.
  CVector project_real(const CVector& x) const;
};

struct NumberEstimateReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
};

struct CoherentEntropyReport {
  double matrix_value = 0.0;
  double analytic_value = 0.0;
  double relative_deviation = 0.0;
  double operator_form_residual = 0.0;
  bool pass = false;
};

struct FockCheck {
  std::string check_name;
  std::map<std::string, double> params;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
void to_json(nlohmann::json& j, const FockCheck& c);

/// ||P (W(chi)W(xi) - e^{-i Im<chi,xi>/2} W(chi+xi)) P|| on sectors <= N/2.
double weyl_relation_residual(const TruncatedFock& tf, const CVector& chi, const CVector& xi);

/// ||P (W(chi)W(-chi) - 1) P|| on sectors <= k.
double weyl_inverse_residual(const TruncatedFock& tf, const CVector& chi, int k);

/// ||P (exp(i t dGamma(h)) - Gamma(exp(i t h))) P|| on sectors <= N - 2.
double dgamma_exponential_residual(const TruncatedFock& tf, const CMatrix& h, double t);

/// ||P (Gamma(u) W(chi) Gamma(u)^* - W(u chi)) P|| on sectors <= N/2.
double gamma_adjoint_check(const TruncatedFock& tf, const CMatrix& u, const CVector& chi);

NumberEstimateReport number_estimate_check(const TruncatedFock& tf, const CVector& chi,
                                           const CVector& psi, int n_pow);

using FockPath = std::function<CVector(double)>;

/// Central difference of t -> W(h(t)) psi against i phi_S(h'(0)) psi.
/// The returned residual is absolute; the criterion is 1e-6 (1 + ||psi||).
double weyl_derivative_check(const TruncatedFock& tf, const FockPath& path,
                             const CVector& h_prime0, const CVector& psi, double t = 1e-4);

/// ||P (W(-xi) dGamma(K) W(xi) - dGamma(K) - <xi,K xi>/2 - phi_S(i K xi)) P||, sectors <= N/2.
double wdgamma_identity_check(const TruncatedFock& tf, const CMatrix& k, const CVector& xi);

/// Omega = W(chi) Omega_F, Omega_t = W(chi - h) Omega_F.  Assembles the relative
/// modular Hamiltonian in its dGamma form and compares <Omega, K Omega> with
/// <h, K_H h>/2; also compares against W(chi - h) dGamma(K_H) W(h - chi).
CoherentEntropyReport coherent_entropy_check(const TruncatedFock& tf,
                                             const StandardSubspaceData& ssd, const CVector& h,
                                             const CVector& chi, double tolerance = 1e-4);

/// Relative modular Hamiltonian of the coherent pair in dGamma form.
CMatrix coherent_modular_hamiltonian(const TruncatedFock& tf, const StandardSubspaceData& ssd,
                                     const CVector& h, const CVector& chi);

/// The seeded identity suite used by the CLI and acceptance run.
std::vector<FockCheck> fock_suite(std::uint64_t seed, int modes, int cutoff, int trials);

}  // namespace relmod
