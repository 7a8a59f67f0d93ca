#pragma once

// Relative modular theory for density matrices.  The algebra is the full
// matrix algebra acting by left multiplication on the Hilbert-Schmidt space,
// whose vectors are d x d matrices identified with C^{d^2} through vec().
// Right multiplications form the commutant.

#include "relmod/matrix_engine.hpp"
#include "relmod/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace relmod {

inline constexpr double kInfiniteEntropy = std::numeric_limits<double>::infinity();

class DensityMatrix {
 public:
  /// Validates Hermiticity, positivity (min eigenvalue >= -1e-12) and unit trace.
  explicit DensityMatrix(const CMatrix& m);

  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }
  const HermitianEig& eig() const { return eig_; }
  double min_eigenvalue() const { return eig_.eigenvalues(0); }
  // Full rank in the sense required for Tomita constructions.
  bool full_rank() const { return min_eigenvalue() >= full_rank_floor; }

  static constexpr double full_rank_floor = 1e-10;

 private:
  CMatrix matrix_;
  HermitianEig eig_;
};

/// x -> M conj(x).
struct AntilinearMap {
  CMatrix linear_part;

  CVector apply(const CVector& x) const { return linear_part * x.conjugate(); }
};

// Compositions.  Two antilinear maps give a linear one.
CMatrix compose(const AntilinearMap& a, const AntilinearMap& b);
AntilinearMap compose(const AntilinearMap& a, const CMatrix& linear);
AntilinearMap compose(const CMatrix& linear, const AntilinearMap& a);

struct ModularData {
  AntilinearMap S;
  AntilinearMap J;
  CMatrix Delta;
  CMatrix K;
  HermitianEig delta_eig;
};

/// tr rho (log rho - log rho_t) on the support of rho, or kInfiniteEntropy
/// when the support of rho is not contained in that of rho_t.
double rel_entropy_dm(const DensityMatrix& rho, const DensityMatrix& rho_t);

/// Relative Tomita operator for the vector states xi, xi_t (invertible d x d
/// matrices): S(a xi) = a^dagger xi_t.
AntilinearMap rel_tomita_vectors(const CMatrix& xi, const CMatrix& xi_t);

/// S for Omega = sqrt(rho), Omega_t = sqrt(rho_t).
AntilinearMap rel_tomita(const DensityMatrix& rho, const DensityMatrix& rho_t);

/// Delta = S^* S, J = S Delta^{-1/2}, K = -log Delta.
ModularData polar_modular(const AntilinearMap& s);

/// The superoperator X -> rho_t X rho^{-1} written in column-stacking form.
CMatrix delta_closed_form(const DensityMatrix& rho, const DensityMatrix& rho_t);

/// <xi, K_{xi_t, xi} xi> computed through the Tomita operator.
double rel_entropy_vectors(const CMatrix& xi, const CMatrix& xi_t);

/// The linear operator J X J^{-1} for antiunitary J.
CMatrix conjugate_by(const AntilinearMap& j, const CMatrix& x);

struct ResidualReport {
  std::string check_name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct InequalityReport {
  std::uint64_t trial_seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

void to_json(nlohmann::json& j, const ResidualReport& r);
void to_json(nlohmann::json& j, const InequalityReport& r);

inline constexpr double kInequalitySlack = 1e-8;

ResidualReport check_unitary_covariance(const CMatrix& u, const DensityMatrix& rho,
                                        const DensityMatrix& rho_t, double tolerance = 1e-8);

ResidualReport check_commutant_cancellation(const CMatrix& u_r, const CMatrix& v_r,
                                            const DensityMatrix& rho,
                                            const DensityMatrix& rho_t,
                                            double tolerance = 1e-8);

struct PurifiedBipartite {
  Eigen::Index d_A = 0;
  Eigen::Index d_B = 0;
  DensityMatrix rho_AB;
  CMatrix Omega;  // sqrt(rho_AB) as a Hilbert-Schmidt vector

  static PurifiedBipartite from_density(const DensityMatrix& rho, Eigen::Index d_A,
                                        Eigen::Index d_B);
};

struct TheoremReport {
  // H^{(1)}(v'v Omega, u'u Omega) <= <u^* v Omega, K_Omega u^* v Omega>.
  InequalityReport upper;
  // H^{(2)}(v v' Omega, u u' Omega) >= H^{(1)}(v v' Omega, u u' Omega).
  InequalityReport lower;
  bool pass() const { return upper.pass && lower.pass; }
};

TheoremReport theorem_entropy_bounds(const PurifiedBipartite& pb, const CMatrix& u,
                                     const CMatrix& v, const CMatrix& u_B,
                                     const CMatrix& v_B);

InequalityReport monotonicity_check(const DensityMatrix& rho_AB, const DensityMatrix& rho_t_AB,
                                    Eigen::Index d_A, Eigen::Index d_B);

void require_unitary(const CMatrix& u, const char* who, double tolerance = 1e-10);

/// Every per-instance property of the finite-dimensional suite, evaluated on
/// one seeded random instance of dimension 2 to 4.
struct FindimInstance {
  std::uint64_t seed = 0;
  Eigen::Index dim = 0;
  std::vector<ResidualReport> checks;
  bool pass() const;
};

FindimInstance findim_suite_instance(std::uint64_t seed);

/// theorem_entropy_bounds on a random full-rank state of C^2 (x) C^2 with
/// Haar unitaries u, v on the pair and u_B, v_B on B, all drawn from `seed`.
TheoremReport theorem_instance(std::uint64_t seed);

/// monotonicity_check on two random states of C^2 (x) C^2 drawn from `seed`.
InequalityReport monotonicity_instance(std::uint64_t seed);

}  // namespace relmod
