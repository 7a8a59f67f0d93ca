#include "relmod/findim_modular.hpp"

#include "relmod/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relmod {

namespace {

constexpr double kPositivityFloor = -1e-12;
constexpr double kTraceTol = 1e-12;
// Weight of rho outside the support of rho_t above which the entropy is infinite.
constexpr double kSupportLeak = 1e-12;
// Relative smallest singular value below which a vector is not separating.
constexpr double kSeparatingFloor = 1e-8;

CMatrix sandwich(const CMatrix& u, const CMatrix& x) {
  CMatrix y = u * x * u.adjoint();
  return 0.5 * (y + y.adjoint());
}

double rel_frob(const CMatrix& a, const CMatrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

ResidualReport make_report(std::string name, double residual, double tolerance) {
  return ResidualReport{std::move(name), residual, tolerance, residual <= tolerance};
}

}  // namespace

DensityMatrix::DensityMatrix(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "DensityMatrix: matrix must be square and non-empty");
  eig_ = hermitian_eig(m);
  matrix_ = 0.5 * (m + m.adjoint());
  if (eig_.eigenvalues(0) < kPositivityFloor) {
    std::ostringstream msg;
    msg << "DensityMatrix: minimum eigenvalue " << eig_.eigenvalues(0) << " is negative";
    throw Error(ErrorCode::DomainViolation, msg.str());
  }
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace " << tr << " differs from 1";
    throw Error(ErrorCode::DomainViolation, msg.str());
  }
}

CMatrix compose(const AntilinearMap& a, const AntilinearMap& b) {
  return a.linear_part * b.linear_part.conjugate();
}

AntilinearMap compose(const AntilinearMap& a, const CMatrix& linear) {
  return AntilinearMap{a.linear_part * linear.conjugate()};
}

AntilinearMap compose(const CMatrix& linear, const AntilinearMap& a) {
  return AntilinearMap{linear * a.linear_part};
}

CMatrix conjugate_by(const AntilinearMap& j, const CMatrix& x) {
  return j.linear_part * x.conjugate() * j.linear_part.adjoint();
}

double rel_entropy_dm(const DensityMatrix& rho, const DensityMatrix& rho_t) {
  if (rho.dim() != rho_t.dim())
    throw Error(ErrorCode::DimensionMismatch, "rel_entropy_dm: dimensions differ");
  const RVector& p = rho.eig().eigenvalues;
  const RVector& q = rho_t.eig().eigenvalues;
  const CMatrix& vp = rho.eig().eigenvectors;
  const CMatrix& vq = rho_t.eig().eigenvectors;
  const double p_cut = tol::support_cut * p.maxCoeff();
  const double q_cut = tol::support_cut * q.maxCoeff();

  // overlap(i, j) = |<p_i|q_j>|^2
  const Eigen::MatrixXd overlap = (vp.adjoint() * vq).cwiseAbs2();
  double h = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    double weight = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p(i) > p_cut) weight += p(i) * overlap(i, j);
    if (q(j) <= q_cut) {
      if (weight > kSupportLeak) return kInfiniteEntropy;
      continue;
    }
    h -= weight * std::log(q(j));
  }
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > p_cut) h += p(i) * std::log(p(i));
  return h;
}

AntilinearMap rel_tomita_vectors(const CMatrix& xi, const CMatrix& xi_t) {
  if (xi.rows() != xi.cols() || xi_t.rows() != xi.rows() || xi_t.cols() != xi.cols())
    throw Error(ErrorCode::DimensionMismatch, "rel_tomita: vectors must be square of equal size");
  const Eigen::Index d = xi.rows();
  Eigen::JacobiSVD<CMatrix> svd(xi);
  const RVector& sv = svd.singularValues();
  if (!(sv(d - 1) > kSeparatingFloor * sv(0)))
    throw Error(ErrorCode::RankDeficient, "rel_tomita: reference vector is not separating");
  const CMatrix xi_inv_adj = xi.inverse().adjoint();
  // S X = xi^{-dagger} X^dagger xi_t; vec(A Y B) = (B^T (x) A) vec(Y), vec(X^dagger) = P conj(vec X).
  return AntilinearMap{kron(xi_t.transpose(), xi_inv_adj) * transpose_permutation(d)};
}

AntilinearMap rel_tomita(const DensityMatrix& rho, const DensityMatrix& rho_t) {
  if (rho.dim() != rho_t.dim())
    throw Error(ErrorCode::DimensionMismatch, "rel_tomita: dimensions differ");
  if (!rho.full_rank() || !rho_t.full_rank())
    throw Error(ErrorCode::RankDeficient, "rel_tomita: both states must be faithful");
  return rel_tomita_vectors(matrix_sqrt(rho.matrix()), matrix_sqrt(rho_t.matrix()));
}

ModularData polar_modular(const AntilinearMap& s) {
  const CMatrix& m = s.linear_part;
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "polar_modular: S must be square");
  ModularData out;
  out.S = s;
  // <y, Delta x> = <S x, S y>  gives  Delta = M^T conj(M).
  CMatrix delta = m.transpose() * m.conjugate();
  delta = 0.5 * (delta + delta.adjoint());
  out.delta_eig = hermitian_eig(delta);
  const RVector& ev = out.delta_eig.eigenvalues;
  if (!(ev(0) > tol::support_cut * ev(ev.size() - 1)))
    throw Error(ErrorCode::SingularS, "polar_modular: S is not injective to working precision");
  out.Delta = delta;
  out.K = matrix_function(out.delta_eig, [](double x) { return cplx(-std::log(x)); },
                          SpectralDomain::positive);
  const CMatrix delta_inv_sqrt = matrix_function(
      out.delta_eig, [](double x) { return cplx(1.0 / std::sqrt(x)); }, SpectralDomain::positive);
  out.J = compose(s, delta_inv_sqrt);
  return out;
}

CMatrix delta_closed_form(const DensityMatrix& rho, const DensityMatrix& rho_t) {
  if (!rho.full_rank())
    throw Error(ErrorCode::RankDeficient, "delta_closed_form: rho must be faithful");
  const CMatrix rho_inv = matrix_function(rho.eig(), [](double x) { return cplx(1.0 / x); },
                                          SpectralDomain::positive);
  return kron(rho_inv.transpose(), rho_t.matrix());
}

double rel_entropy_vectors(const CMatrix& xi, const CMatrix& xi_t) {
  const ModularData md = polar_modular(rel_tomita_vectors(xi, xi_t));
  const CVector x = vec(xi);
  return x.dot(md.K * x).real();
}

void to_json(nlohmann::json& j, const ResidualReport& r) {
  j = nlohmann::json{{"check_name", r.check_name},
                     {"residual", r.residual},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j = nlohmann::json{{"trial_seed", r.trial_seed},
                     {"lhs", r.lhs},
                     {"rhs", r.rhs},
                     {"margin", r.margin},
                     {"pass", r.pass}};
}

void require_unitary(const CMatrix& u, const char* who, double tolerance) {
  if (u.rows() != u.cols())
    throw Error(ErrorCode::NonUnitary, std::string(who) + ": matrix is not square");
  const double res = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
  if (!(res <= tolerance)) {
    std::ostringstream msg;
    msg << who << ": ||u^dagger u - 1|| = " << res;
    throw Error(ErrorCode::NonUnitary, msg.str());
  }
}

ResidualReport check_unitary_covariance(const CMatrix& u, const DensityMatrix& rho,
                                        const DensityMatrix& rho_t, double tolerance) {
  require_unitary(u, "check_unitary_covariance");
  if (u.rows() != rho.dim())
    throw Error(ErrorCode::DimensionMismatch, "check_unitary_covariance: unitary size");
  const ModularData base = polar_modular(rel_tomita(rho, rho_t));
  const DensityMatrix rho_u(sandwich(u, rho.matrix()));
  const DensityMatrix rho_t_u(sandwich(u, rho_t.matrix()));
  const ModularData moved = polar_modular(rel_tomita(rho_u, rho_t_u));
  // X -> u X u^dagger on vec'd matrices.
  const CMatrix hs_u = kron(u.conjugate(), u);
  const double residual = (moved.K - hs_u * base.K * hs_u.adjoint()).norm();
  return make_report("unitary_covariance", residual, tolerance);
}

ResidualReport check_commutant_cancellation(const CMatrix& u_r, const CMatrix& v_r,
                                            const DensityMatrix& rho,
                                            const DensityMatrix& rho_t, double tolerance) {
  require_unitary(u_r, "check_commutant_cancellation(u_r)");
  require_unitary(v_r, "check_commutant_cancellation(v_r)");
  if (!rho.full_rank() || !rho_t.full_rank())
    throw Error(ErrorCode::RankDeficient, "check_commutant_cancellation: states must be faithful");
  const CMatrix omega = matrix_sqrt(rho.matrix());
  const CMatrix omega_t = matrix_sqrt(rho_t.matrix());
  const double h0 = rel_entropy_vectors(omega, omega_t);
  const double h1 = rel_entropy_vectors(omega * v_r, omega_t * u_r);
  return make_report("commutant_cancellation", std::abs(h1 - h0), tolerance);
}

PurifiedBipartite PurifiedBipartite::from_density(const DensityMatrix& rho, Eigen::Index d_A,
                                                  Eigen::Index d_B) {
  if (rho.dim() != d_A * d_B)
    throw Error(ErrorCode::DimensionMismatch, "PurifiedBipartite: dim != d_A * d_B");
  if (!rho.full_rank())
    throw Error(ErrorCode::RankDeficient, "PurifiedBipartite: rho_AB must be full rank");
  return PurifiedBipartite{d_A, d_B, rho, matrix_sqrt(rho.matrix())};
}

namespace {

InequalityReport make_inequality(double lhs, double rhs) {
  InequalityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  if (std::isinf(rhs))
    r.margin = std::isinf(lhs) ? 0.0 : kInfiniteEntropy;
  else
    r.margin = rhs - lhs;
  r.pass = r.margin >= -kInequalitySlack;
  return r;
}

DensityMatrix reduce_to_A(const CMatrix& rho, Eigen::Index d_A, Eigen::Index d_B) {
  const CMatrix r = partial_trace(rho, Subsystem::B, d_A, d_B);
  return DensityMatrix(0.5 * (r + r.adjoint()));
}

}  // namespace

TheoremReport theorem_entropy_bounds(const PurifiedBipartite& pb, const CMatrix& u,
                                     const CMatrix& v, const CMatrix& u_B,
                                     const CMatrix& v_B) {
  const Eigen::Index d = pb.d_A * pb.d_B;
  for (const CMatrix* m : {&u, &v})
    if (m->rows() != d) throw Error(ErrorCode::DimensionMismatch, "theorem: unitary on H_AB");
  for (const CMatrix* m : {&u_B, &v_B})
    if (m->rows() != pb.d_B) throw Error(ErrorCode::DimensionMismatch, "theorem: unitary on H_B");
  require_unitary(u, "theorem_entropy_bounds(u)");
  require_unitary(v, "theorem_entropy_bounds(v)");
  require_unitary(u_B, "theorem_entropy_bounds(u_B)");
  require_unitary(v_B, "theorem_entropy_bounds(v_B)");

  const CMatrix id_a = CMatrix::Identity(pb.d_A, pb.d_A);
  const CMatrix u_p = kron(id_a, u_B);  // commutant of the A algebra
  const CMatrix v_p = kron(id_a, v_B);
  const CMatrix& rho = pb.rho_AB.matrix();

  TheoremReport out;
  {
    const double lhs = rel_entropy_dm(reduce_to_A(sandwich(v_p * v, rho), pb.d_A, pb.d_B),
                                      reduce_to_A(sandwich(u_p * u, rho), pb.d_A, pb.d_B));
    const ModularData md = polar_modular(rel_tomita(pb.rho_AB, pb.rho_AB));
    const CVector x = vec(u.adjoint() * v * pb.Omega);
    const double rhs = x.dot(md.K * x).real();
    out.upper = make_inequality(lhs, rhs);
  }
  {
    const CMatrix xi = v * v_p * pb.Omega;
    const CMatrix xi_t = u * u_p * pb.Omega;
    const double h2 = rel_entropy_vectors(xi, xi_t);
    const double h1 = rel_entropy_dm(reduce_to_A(xi * xi.adjoint(), pb.d_A, pb.d_B),
                                     reduce_to_A(xi_t * xi_t.adjoint(), pb.d_A, pb.d_B));
    out.lower = make_inequality(h1, h2);
  }
  return out;
}

InequalityReport monotonicity_check(const DensityMatrix& rho_AB, const DensityMatrix& rho_t_AB,
                                    Eigen::Index d_A, Eigen::Index d_B) {
  if (rho_AB.dim() != d_A * d_B || rho_t_AB.dim() != d_A * d_B)
    throw Error(ErrorCode::DimensionMismatch, "monotonicity_check: dims");
  const double lhs = rel_entropy_dm(reduce_to_A(rho_AB.matrix(), d_A, d_B),
                                    reduce_to_A(rho_t_AB.matrix(), d_A, d_B));
  const double rhs = rel_entropy_dm(rho_AB, rho_t_AB);
  return make_inequality(lhs, rhs);
}

bool FindimInstance::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ResidualReport& r) { return r.pass; });
}

FindimInstance findim_suite_instance(std::uint64_t seed) {
  Rng rng(seed);
  FindimInstance out;
  out.seed = seed;
  out.dim = std::uniform_int_distribution<int>(2, 4)(rng);
  const Eigen::Index d = out.dim;

  const DensityMatrix rho(random_density(d, rng));
  const DensityMatrix rho_t(random_density(d, rng));
  const CMatrix u = haar_unitary(d, rng);
  const CMatrix u_r = haar_unitary(d, rng);
  const CMatrix v_r = haar_unitary(d, rng);

  auto& c = out.checks;
  const double h = rel_entropy_dm(rho, rho_t);
  const double h_self = rel_entropy_dm(rho, rho);
  c.push_back(make_report("klein_nonnegative", std::max(0.0, -h), 1e-10));
  c.push_back(make_report("klein_equal_states", std::abs(h_self), 1e-10));
  {
    const bool distinct = (rho.matrix() - rho_t.matrix()).norm() > 1e-8;
    const bool strict = !distinct || h > 1e-10;
    c.push_back(make_report("klein_strict", strict ? 0.0 : 1.0, 0.0));
  }
  {
    const double hu = rel_entropy_dm(DensityMatrix(sandwich(u, rho.matrix())),
                                     DensityMatrix(sandwich(u, rho_t.matrix())));
    c.push_back(make_report("joint_unitary_invariance", std::abs(hu - h), 1e-9));
  }
  c.push_back(check_unitary_covariance(u, rho, rho_t));
  c.push_back(check_commutant_cancellation(u_r, v_r, rho, rho_t));

  const AntilinearMap s = rel_tomita(rho, rho_t);
  const ModularData md = polar_modular(s);
  const Eigen::Index hs = d * d;
  {
    const CMatrix delta_sqrt = matrix_function(
        md.delta_eig, [](double x) { return cplx(std::sqrt(x)); }, SpectralDomain::positive);
    const AntilinearMap rebuilt = compose(md.J, delta_sqrt);
    c.push_back(make_report("polar_reconstruction", rel_frob(rebuilt.linear_part, s.linear_part),
                            1e-9));
  }
  c.push_back(make_report("delta_closed_form",
                          rel_frob(md.Delta, delta_closed_form(rho, rho_t)), 1e-9));
  c.push_back(make_report(
      "j_antiunitary",
      (md.J.linear_part.adjoint() * md.J.linear_part - CMatrix::Identity(hs, hs)).norm(), 1e-10));
  {
    const CVector omega = vec(matrix_sqrt(rho.matrix()));
    const double hk = omega.dot(md.K * omega).real();
    c.push_back(make_report("entropy_cross_formula", std::abs(hk - h), 1e-8));
  }
  {
    const CMatrix sq = matrix_sqrt(rho.matrix());
    const CMatrix sq_t = matrix_sqrt(rho_t.matrix());
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      const CMatrix a = complex_gaussian(d, d, rng);
      const CVector lhs = s.apply(vec(a * sq));
      const CVector rhs = vec(a.adjoint() * sq_t);
      worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
    }
    c.push_back(make_report("tomita_defining_relation", worst, 1e-10));
  }
  {
    const CMatrix product = compose(rel_tomita(rho_t, rho), s);
    c.push_back(make_report("tomita_inverse",
                            (product - CMatrix::Identity(hs, hs)).norm() / std::sqrt(double(hs)),
                            1e-10));
  }
  {
    const ModularData swapped = polar_modular(rel_tomita(rho_t, rho));
    const CMatrix rhs = -conjugate_by(md.J, md.K);
    c.push_back(make_report("k_swap_relation",
                            (swapped.K - rhs).norm() / std::max(1.0, md.K.norm()), 1e-8));
  }
  return out;
}

TheoremReport theorem_instance(std::uint64_t seed) {
  Rng rng(seed);
  const auto pb = PurifiedBipartite::from_density(DensityMatrix(random_density(4, rng)), 2, 2);
  const CMatrix u = haar_unitary(4, rng), v = haar_unitary(4, rng);
  const CMatrix u_b = haar_unitary(2, rng), v_b = haar_unitary(2, rng);
  TheoremReport r = theorem_entropy_bounds(pb, u, v, u_b, v_b);
  r.upper.trial_seed = seed;
  r.lower.trial_seed = seed;
  return r;
}

InequalityReport monotonicity_instance(std::uint64_t seed) {
  Rng rng(seed);
  const DensityMatrix rho(random_density(4, rng));
  const DensityMatrix rho_t(random_density(4, rng));
  InequalityReport r = monotonicity_check(rho, rho_t, 2, 2);
  r.trial_seed = seed;
  return r;
}

}  // namespace relmod
