#pragma once

// Truncated Cuntz families built from shift operators and the non-signalling
// unitaries they generate.  On C^D the shift S_j sends e_k to e_{nk+j}; the
// relations S_i^dagger S_j = delta_ij hold exactly on the span of the e_k with
// nk + n - 1 < D (the defect-free subspace), and every assertion below is made
// on that compression.

#include "relmod/matrix_engine.hpp"

#include <Eigen/SparseCore>
#include <json.hpp>

#include <cstdint>
#include <vector>

namespace relmod {

using SMatrix = Eigen::SparseMatrix<cplx>;

SMatrix sparse_kron(const SMatrix& a, const SMatrix& b);
SMatrix sparse_identity(Eigen::Index n);

/// Entries of x restricted to rows and columns in `keep`.
CMatrix compress_indices(const SMatrix& x, const std::vector<Eigen::Index>& keep);

/// Indices of a product basis whose factors all lie in the given index sets.
std::vector<Eigen::Index> product_indices(const std::vector<std::vector<Eigen::Index>>& factors,
                                          const std::vector<Eigen::Index>& dims);

struct CuntzRelationReport {
  double defect_free_residual = 0.0;  // max over i, j and the sum relation
  double full_space_defect = 0.0;     // same on the whole space (reported only)
};

class TruncatedCuntz {
 public:
  int branching() const { return n_; }
  Eigen::Index dim() const { return dim_; }
  const SMatrix& shift(int j) const { return shifts_[static_cast<std::size_t>(j)]; }
  const std::vector<Eigen::Index>& defect_free() const { return defect_free_; }
  Eigen::Index defect_free_dim() const { return static_cast<Eigen::Index>(defect_free_.size()); }

  /// Frobenius residuals of S_i^dagger S_j - delta_ij and sum_j S_j S_j^dagger - 1.
  CuntzRelationReport relation_residuals() const;

  friend TruncatedCuntz build_truncated_cuntz(int n, Eigen::Index dim);

 private:
  int n_ = 0;
  Eigen::Index dim_ = 0;
  std::vector<SMatrix> shifts_;
  std::vector<Eigen::Index> defect_free_;
};

/// Requires n >= 1 and dim >= n^2 (DimensionTooSmall otherwise).
TruncatedCuntz build_truncated_cuntz(int n, Eigen::Index dim);

/// w = sum_i S_i (x) S_i^dagger on C^D (x) C^D.  With u_i = 1 (x) S_i^dagger and
/// u'_i = S_i (x) 1 this is sum_i u'_i u_i.
SMatrix cuntz_sum_unitary(const TruncatedCuntz& tc);

struct SignallingScenario {
  std::vector<SMatrix> alice_generators;
  std::vector<SMatrix> charlie_generators;
  SMatrix w;
  std::vector<Eigen::Index> defect_free;  // composite indices kept by P
};

struct CommutatorReport {
  double max_residual = 0.0;  // Frobenius bound on max ||P [w a w^dagger, c] P||
  double full_space_residual = 0.0;
  int pairs = 0;
};

CommutatorReport nonsignalling_check(const SignallingScenario& sc);

/// Two factors of dimension D with Alice acting on the first and Charlie on
/// the second; `generators` random Hermitian matrices on each side.
SignallingScenario make_two_factor_scenario(const TruncatedCuntz& tc, const SMatrix& w,
                                            int generators, std::uint64_t seed);

/// (1 - eps) sqrt(2 - sqrt 2) - 2 sqrt(2 eps).
double norm_gap_floor(double epsilon);
/// The positive root of norm_gap_floor.
double norm_gap_floor_root();

struct NormGapReport {
  double epsilon = 0.0;
  int samples = 0;
  Eigen::Index dim = 0;
  double floor = 0.0;
  double min_gap = 0.0;          // over sampled Haar pairs
  double adversarial_gap = 0.0;  // after alternating alignment
  double slack = 0.0;
  bool pass = false;
};
void to_json(nlohmann::json& j, const NormGapReport& r);

/// Distance ||(u' (x) u) Omega - w Omega|| for Haar pairs and an adversarial
/// alignment, compared with the floor minus slack.  Requires 0 < eps <= 0.05.
NormGapReport norm_gap_experiment(double epsilon, int samples, Eigen::Index dim = 64,
                                  double tail_decay = 0.5, std::uint64_t seed = 1, int n = 2);

struct FactorizationReport {
  int n = 0;
  Eigen::Index middle_dim = 0;
  double residual = 0.0;            // ||P (u' u - w) P||_F
  double unitarity_u = 0.0;         // ||P u^dagger u P - P||_F + ||P u u^dagger P - P||_F
  double unitarity_u_prime = 0.0;
  bool pass = false;
};

/// Three factors (outer, middle, outer) with an independent Cuntz family on the
/// middle factor: u' = sum_i u'_i c_i^dagger, u = sum_i c_i u_i.
FactorizationReport product_reconstruction(int n, Eigen::Index outer_dim, Eigen::Index middle_dim);

struct ProductGapCertificate {
  int n = 0;
  Eigen::Index dim = 0;
  double relative_distance = 0.0;  // min over all A (x) B of ||PwP - A (x) B||_F / ||P||_F
  std::vector<double> singular_values;
  bool certified = false;  // relative_distance > 0.1
};

/// Without a middle factor no product form exists for n > 1; the realignment
/// singular values give the exact Frobenius distance to all Kronecker products.
ProductGapCertificate product_form_gap(int n, Eigen::Index dim);

}  // namespace relmod
