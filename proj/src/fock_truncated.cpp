#include "relmod/fock_truncated.hpp"

#include "relmod/errors.hpp"
#include "relmod/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace relmod {

namespace {

void compositions(int total, int parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    current.push_back(first);
    compositions(total - first, parts - 1, current, out);
    current.pop_back();
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

}  // namespace

TruncatedFock::TruncatedFock(int modes, int cutoff) : modes_(modes), cutoff_(cutoff) {
  if (modes < 1 || cutoff < 0)
    throw Error(ErrorCode::ParameterViolation, "TruncatedFock: need modes >= 1 and cutoff >= 0");
  for (int k = 0; k <= cutoff; ++k) {
    std::vector<int> cur;
    std::vector<std::vector<int>> sector;
    compositions(k, modes, cur, sector);
    for (auto& occ : sector) {
      index_[occ] = static_cast<Eigen::Index>(basis_.size());
      basis_.push_back(occ);
      degree_.push_back(k);
    }
  }
  const Eigen::Index d = dim();
  ladder_.assign(static_cast<std::size_t>(modes), CMatrix::Zero(d, d));
  for (Eigen::Index col = 0; col < d; ++col) {
    const auto& occ = basis_[static_cast<std::size_t>(col)];
    for (int i = 0; i < modes; ++i) {
      if (occ[static_cast<std::size_t>(i)] == 0) continue;
      auto lowered = occ;
      --lowered[static_cast<std::size_t>(i)];
      ladder_[static_cast<std::size_t>(i)](index_.at(lowered), col) =
          std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(i)]));
    }
  }
}

Eigen::Index TruncatedFock::index_of(const std::vector<int>& occupation) const {
  auto it = index_.find(occupation);
  if (it == index_.end())
    throw Error(ErrorCode::DimensionMismatch, "TruncatedFock: occupation outside the truncation");
  return it->second;
}

Eigen::Index TruncatedFock::sector_dim(int k) const {
  if (k < 0) return 0;
  if (k >= cutoff_) return dim();
  return static_cast<Eigen::Index>(
      std::upper_bound(degree_.begin(), degree_.end(), k) - degree_.begin());
}

CVector TruncatedFock::vacuum() const {
  CVector v = CVector::Zero(dim());
  v(0) = 1.0;
  return v;
}

namespace {

void require_modes(const TruncatedFock& tf, const CVector& chi) {
  if (chi.size() != tf.modes())
    throw Error(ErrorCode::DimensionMismatch, "Fock: one-particle vector has the wrong length");
}

}  // namespace

CMatrix annihilation(const TruncatedFock& tf, const CVector& chi) {
  require_modes(tf, chi);
  CMatrix a = CMatrix::Zero(tf.dim(), tf.dim());
  for (int i = 0; i < tf.modes(); ++i) a += std::conj(chi(i)) * tf.annihilator(i);
  return a;
}

CMatrix creation(const TruncatedFock& tf, const CVector& chi) {
  return annihilation(tf, chi).adjoint();
}

CMatrix segal_field(const TruncatedFock& tf, const CVector& chi) {
  const CMatrix a = annihilation(tf, chi);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

CMatrix weyl(const TruncatedFock& tf, const CVector& chi, double chi_max) {
  require_modes(tf, chi);
  const double norm = chi.norm();
  if (norm > chi_max) {
    std::ostringstream msg;
    msg << "weyl: ||chi|| = " << norm << " exceeds chi_max = " << chi_max;
    throw Error(ErrorCode::TruncationBudgetExceeded, msg.str());
  }
  if (norm == 0.0) return CMatrix::Identity(tf.dim(), tf.dim());
  return unitary_exp(segal_field(tf, chi));
}

CMatrix dgamma(const TruncatedFock& tf, const CMatrix& h) {
  if (h.rows() != tf.modes() || h.cols() != tf.modes())
    throw Error(ErrorCode::DimensionMismatch, "dgamma: one-particle operator size");
  CMatrix out = CMatrix::Zero(tf.dim(), tf.dim());
  for (int i = 0; i < tf.modes(); ++i)
    for (int j = 0; j < tf.modes(); ++j)
      if (h(i, j) != cplx(0.0))
        out += h(i, j) * tf.annihilator(i).adjoint() * tf.annihilator(j);
  return out;
}

cplx permanent(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw Error(ErrorCode::DimensionMismatch, "permanent: square matrix required");
  if (n == 0) return 1.0;
  // Ryser with Gray-code subset enumeration.
  CVector row_sums = CVector::Zero(n);
  cplx total = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray_prev = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t flipped = gray ^ gray_prev;
    const int col = __builtin_ctzll(flipped);
    if (gray & flipped)
      row_sums += m.col(col);
    else
      row_sums -= m.col(col);
    gray_prev = gray;
    cplx prod = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) prod *= row_sums(i);
    const int size = __builtin_popcountll(gray);
    total += ((size % 2) == (n % 2) ? 1.0 : -1.0) * prod;
  }
  return total;
}

CMatrix second_quantize(const TruncatedFock& tf, const CMatrix& u) {
  if (u.rows() != tf.modes() || u.cols() != tf.modes())
    throw Error(ErrorCode::DimensionMismatch, "second_quantize: one-particle operator size");
  const Eigen::Index d = tf.dim();
  CMatrix g = CMatrix::Zero(d, d);
  auto expand = [](const std::vector<int>& occ) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < occ.size(); ++i)
      for (int r = 0; r < occ[i]; ++r) idx.push_back(static_cast<int>(i));
    return idx;
  };
  auto occ_norm = [](const std::vector<int>& occ) {
    double f = 1.0;
    for (int m : occ) f *= factorial(m);
    return f;
  };
  for (int k = 0; k <= tf.cutoff(); ++k) {
    const Eigen::Index lo = tf.sector_dim(k - 1), hi = tf.sector_dim(k);
    for (Eigen::Index r = lo; r < hi; ++r) {
      const auto& m = tf.basis()[static_cast<std::size_t>(r)];
      const auto rows = expand(m);
      for (Eigen::Index c = lo; c < hi; ++c) {
        const auto& n = tf.basis()[static_cast<std::size_t>(c)];
        const auto cols = expand(n);
        CMatrix sub(k, k);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) sub(i, j) = u(rows[static_cast<std::size_t>(i)],
                                                   cols[static_cast<std::size_t>(j)]);
        g(r, c) = permanent(sub) / std::sqrt(occ_norm(m) * occ_norm(n));
      }
    }
  }
  return g;
}

int particle_degree(const TruncatedFock& tf, const CVector& psi, double floor) {
  if (psi.size() != tf.dim()) throw Error(ErrorCode::DimensionMismatch, "particle_degree: size");
  const double cut = floor * psi.norm();
  int deg = 0;
  for (Eigen::Index k = 0; k < psi.size(); ++k)
    if (std::abs(psi(k)) > cut) deg = std::max(deg, tf.degree(k));
  return deg;
}

CMatrix compress(const TruncatedFock& tf, const CMatrix& x, int k) {
  const Eigen::Index m = tf.sector_dim(k);
  return x.topLeftCorner(m, m);
}

StandardSubspaceData StandardSubspaceData::from_pairs(const std::vector<double>& lambdas,
                                                      const CMatrix& u) {
  const int n = static_cast<int>(u.rows());
  if (u.cols() != n || static_cast<int>(lambdas.size()) != n / 2)
    throw Error(ErrorCode::DimensionMismatch, "StandardSubspaceData: need n/2 eigenvalue pairs");
  require_unitary(u, "StandardSubspaceData");
  RVector diag = RVector::Ones(n);
  CMatrix sigma = CMatrix::Zero(n, n);
  for (int p = 0; p < n / 2; ++p) {
    if (!(lambdas[static_cast<std::size_t>(p)] > 0.0))
      throw Error(ErrorCode::ParameterViolation, "StandardSubspaceData: lambda must be positive");
    diag(2 * p) = lambdas[static_cast<std::size_t>(p)];
    diag(2 * p + 1) = 1.0 / lambdas[static_cast<std::size_t>(p)];
    sigma(2 * p, 2 * p + 1) = sigma(2 * p + 1, 2 * p) = 1.0;
  }
  if (n % 2 == 1) sigma(n - 1, n - 1) = 1.0;
  StandardSubspaceData out;
  out.mode_dim = n;
  out.Delta_H = u * diag.cast<cplx>().asDiagonal() * u.adjoint();
  out.J_H = AntilinearMap{u * sigma * u.transpose()};
  RVector log_diag = -diag.array().log();
  out.K_H = u * log_diag.cast<cplx>().asDiagonal() * u.adjoint();
  return out;
}

AntilinearMap StandardSubspaceData::tomita() const {
  return compose(J_H, matrix_sqrt(Delta_H));
}

CVector StandardSubspaceData::project_real(const CVector& x) const {
  return 0.5 * (x + tomita().apply(x));
}

void to_json(nlohmann::json& j, const FockCheck& c) {
  j = nlohmann::json{{"check_name", c.check_name},
                     {"params", c.params},
                     {"residual", c.residual},
                     {"tolerance", c.tolerance},
                     {"pass", c.pass}};
}

double weyl_relation_residual(const TruncatedFock& tf, const CVector& chi, const CVector& xi) {
  const cplx phase = std::polar(1.0, -0.5 * chi.dot(xi).imag());
  const CMatrix lhs = weyl(tf, chi) * weyl(tf, xi);
  const CMatrix rhs = phase * weyl(tf, chi + xi, 2.0 * kDefaultChiMax);
  return operator_norm(compress(tf, lhs - rhs, tf.cutoff() / 2));
}

double weyl_inverse_residual(const TruncatedFock& tf, const CVector& chi, int k) {
  const CMatrix prod = weyl(tf, chi) * weyl(tf, -chi);
  return operator_norm(compress(tf, prod - CMatrix::Identity(tf.dim(), tf.dim()), k));
}

double dgamma_exponential_residual(const TruncatedFock& tf, const CMatrix& h, double t) {
  const CMatrix lhs = unitary_exp(dgamma(tf, h), t);
  const CMatrix rhs = second_quantize(tf, unitary_exp(h, t));
  return operator_norm(compress(tf, lhs - rhs, tf.cutoff() - 2));
}

double gamma_adjoint_check(const TruncatedFock& tf, const CMatrix& u, const CVector& chi) {
  require_unitary(u, "gamma_adjoint_check");
  const CMatrix g = second_quantize(tf, u);
  const CMatrix lhs = g * weyl(tf, chi) * g.adjoint();
  const CMatrix rhs = weyl(tf, u * chi);
  return operator_norm(compress(tf, lhs - rhs, tf.cutoff() / 2));
}

NumberEstimateReport number_estimate_check(const TruncatedFock& tf, const CVector& chi,
                                           const CVector& psi, int n_pow) {
  require_modes(tf, chi);
  if (n_pow < 0) throw Error(ErrorCode::ParameterViolation, "number_estimate_check: n_pow < 0");
  const int deg = particle_degree(tf, psi);
  if (deg > tf.cutoff() - n_pow)
    throw Error(ErrorCode::TruncationBudgetExceeded,
                "number_estimate_check: psi degree + n_pow exceeds the cutoff");
  const CMatrix phi = segal_field(tf, chi);
  CVector x = psi;
  for (int k = 0; k < n_pow; ++k) x = phi * x;
  NumberEstimateReport r;
  r.lhs = x.norm();
  r.rhs = std::pow(2.0 * (deg + 1), 0.5 * n_pow) * std::pow(chi.norm(), n_pow) *
          std::sqrt(factorial(n_pow)) * psi.norm();
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

double weyl_derivative_check(const TruncatedFock& tf, const FockPath& path,
                             const CVector& h_prime0, const CVector& psi, double t) {
  if (psi.size() != tf.dim()) throw Error(ErrorCode::DimensionMismatch, "derivative: psi size");
  const CVector plus = weyl(tf, path(t), kUnbounded) * psi;
  const CVector minus = weyl(tf, path(-t), kUnbounded) * psi;
  const CVector fd = (plus - minus) / (2.0 * t);
  const CVector exact = cplx(0.0, 1.0) * (segal_field(tf, h_prime0) * psi);
  return (fd - exact).norm();
}

double wdgamma_identity_check(const TruncatedFock& tf, const CMatrix& k, const CVector& xi) {
  const CMatrix dg = dgamma(tf, k);
  const CMatrix lhs = weyl(tf, -xi) * dg * weyl(tf, xi) - dg;
  const cplx constant = 0.5 * xi.dot(k * xi);
  const CMatrix rhs = constant * CMatrix::Identity(tf.dim(), tf.dim()) +
                      segal_field(tf, cplx(0.0, 1.0) * (k * xi));
  return operator_norm(compress(tf, lhs - rhs, tf.cutoff() / 2));
}

CMatrix coherent_modular_hamiltonian(const TruncatedFock& tf, const StandardSubspaceData& ssd,
                                     const CVector& h, const CVector& chi) {
  const CVector b = chi - h;
  const CMatrix& k = ssd.K_H;
  const cplx constant = 0.5 * b.dot(k * b);
  return dgamma(tf, k) + constant * CMatrix::Identity(tf.dim(), tf.dim()) -
         segal_field(tf, cplx(0.0, 1.0) * (k * b));
}

CoherentEntropyReport coherent_entropy_check(const TruncatedFock& tf,
                                             const StandardSubspaceData& ssd, const CVector& h,
                                             const CVector& chi, double tolerance) {
  require_modes(tf, h);
  require_modes(tf, chi);
  if (ssd.mode_dim != tf.modes())
    throw Error(ErrorCode::DimensionMismatch, "coherent_entropy_check: mode count");
  if (h.norm() > kDefaultChiMax || chi.norm() > kDefaultChiMax || (chi - h).norm() > kDefaultChiMax)
    throw Error(ErrorCode::TruncationBudgetExceeded, "coherent_entropy_check: vectors too long");

  const CMatrix k_rel = coherent_modular_hamiltonian(tf, ssd, h, chi);
  const CVector omega = weyl(tf, chi) * tf.vacuum();
  CoherentEntropyReport r;
  r.matrix_value = omega.dot(k_rel * omega).real();
  r.analytic_value = 0.5 * h.dot(ssd.K_H * h).real();
  r.relative_deviation =
      std::abs(r.matrix_value - r.analytic_value) / std::max(std::abs(r.analytic_value), 1e-6);

  const CVector b = chi - h;
  const CMatrix conj_form = weyl(tf, b) * dgamma(tf, ssd.K_H) * weyl(tf, -b);
  r.operator_form_residual = operator_norm(compress(tf, k_rel - conj_form, tf.cutoff() / 2));
  r.pass = r.relative_deviation <= tolerance && r.operator_form_residual <= 1e-5;
  return r;
}

namespace {

CVector random_vector_with_norm(Eigen::Index n, double norm, Rng& rng) {
  CVector v = complex_gaussian_vector(n, rng);
  return v * (norm / v.norm());
}

CVector random_low_degree(const TruncatedFock& tf, int deg, Rng& rng) {
  CVector psi = CVector::Zero(tf.dim());
  const Eigen::Index m = tf.sector_dim(deg);
  psi.head(m) = complex_gaussian_vector(m, rng);
  return psi / psi.norm();
}

FockCheck make_check(std::string name, double residual, double tolerance,
                     std::map<std::string, double> params) {
  return FockCheck{std::move(name), std::move(params), residual, tolerance, residual <= tolerance};
}

}  // namespace

std::vector<FockCheck> fock_suite(std::uint64_t seed, int modes, int cutoff, int trials) {
  if (trials < 1) throw Error(ErrorCode::ParameterViolation, "fock_suite: trials must be >= 1");
  Rng rng(seed);
  const TruncatedFock tf(modes, cutoff);
  const std::map<std::string, double> base{{"modes", modes}, {"cutoff", cutoff}, {"trials", trials}};
  std::vector<FockCheck> out;
  const Eigen::Index n = modes;

  double weyl_rel = 0.0, weyl_inv = 0.0, dg_exp = 0.0, gamma_adj = 0.0, wdg = 0.0;
  double deriv = 0.0, number_violation = 0.0, number_min_margin = kUnbounded;
  double coherent_dev = 0.0, coherent_op = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const CVector chi = random_vector_with_norm(n, uniform(rng, 0.05, kDefaultChiMax), rng);
    const CVector xi = random_vector_with_norm(n, uniform(rng, 0.05, kDefaultChiMax), rng);
    weyl_rel = std::max(weyl_rel, weyl_relation_residual(tf, chi, xi));
    weyl_inv = std::max(weyl_inv, weyl_inverse_residual(tf, chi, std::min(4, cutoff)));

    const CMatrix h = random_hermitian(n, rng);
    dg_exp = std::max(dg_exp, dgamma_exponential_residual(tf, h, uniform(rng, -1.0, 1.0)));
    gamma_adj = std::max(gamma_adj, gamma_adjoint_check(tf, haar_unitary(n, rng), chi));

    const CVector xi3 = random_vector_with_norm(n, 0.3, rng);
    wdg = std::max(wdg, wdgamma_identity_check(tf, h, xi3));

    const CVector psi = random_low_degree(tf, 3, rng);
    const CVector dir = random_vector_with_norm(n, 1.0, rng);
    const double scale = 1.0 + psi.norm();
    deriv = std::max(deriv, weyl_derivative_check(
                                tf, [&](double t) { return CVector(t * dir); }, dir, psi) / scale);
    const CMatrix u_path = h;
    deriv = std::max(
        deriv, weyl_derivative_check(
                   tf,
                   [&](double t) { return CVector((unitary_exp(u_path, t) - CMatrix::Identity(n, n)) * xi3); },
                   cplx(0.0, 1.0) * (u_path * xi3), psi) /
                   scale);

    for (int p = 1; p <= 4; ++p) {
      const auto rep = number_estimate_check(tf, chi, psi, p);
      number_violation = std::max(number_violation, -rep.margin);
      number_min_margin = std::min(number_min_margin, rep.margin);
    }

    if (modes % 2 == 0) {
      std::vector<double> lambdas;
      for (int p = 0; p < modes / 2; ++p) lambdas.push_back(uniform(rng, 1.2, 3.0));
      const auto ssd = StandardSubspaceData::from_pairs(lambdas, haar_unitary(n, rng));
      CVector hv = ssd.project_real(complex_gaussian_vector(n, rng));
      hv *= uniform(rng, 0.05, 0.25) / hv.norm();
      const CVector chi_c = random_vector_with_norm(n, uniform(rng, 0.0, 0.25), rng);
      const auto rep = coherent_entropy_check(tf, ssd, hv, chi_c);
      coherent_dev = std::max(coherent_dev, rep.relative_deviation);
      coherent_op = std::max(coherent_op, rep.operator_form_residual);
    }
  }
  out.push_back(make_check("weyl_relation", weyl_rel, 1e-6, base));
  out.push_back(make_check("weyl_inverse", weyl_inv, 1e-8, base));
  out.push_back(make_check("dgamma_exponential", dg_exp, 1e-8, base));
  out.push_back(make_check("gamma_conjugation", gamma_adj, 1e-6, base));
  out.push_back(make_check("wdgamma_identity", wdg, 1e-5, base));
  out.push_back(make_check("weyl_derivative", deriv, 1e-6, base));
  {
    auto params = base;
    params["min_margin"] = number_min_margin;
    out.push_back(make_check("number_estimate", std::max(0.0, number_violation), 0.0, params));
  }
  if (modes % 2 == 0) {
    out.push_back(make_check("coherent_entropy", coherent_dev, 1e-4, base));
    out.push_back(make_check("coherent_operator_form", coherent_op, 1e-5, base));
  }
  if (modes == 2) {
    // lambda = 2, h along the first eigenvector of Delta_H (eigenvalue 1/2), ||h|| = 0.2.
    const auto ssd = StandardSubspaceData::from_pairs({2.0}, CMatrix::Identity(2, 2));
    CVector hv = CVector::Zero(2);
    hv(1) = 0.2;
    CVector chi = CVector::Zero(2);
    chi(0) = cplx(0.1, 0.05);
    const auto rep = coherent_entropy_check(tf, ssd, hv, chi);
    const double target = 0.5 * std::log(2.0) * 0.04;
    auto params = base;
    params["lambda"] = 2.0;
    params["h_norm"] = 0.2;
    params["value"] = rep.matrix_value;
    params["target"] = target;
    out.push_back(make_check("coherent_entropy_closed_form",
                             std::abs(rep.matrix_value - target) / target, 1e-4, params));
  }
  return out;
}

}  // namespace relmod
