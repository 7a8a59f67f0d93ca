#include "relmod/signalling.hpp"

#include "relmod/errors.hpp"
#include "relmod/random.hpp"

#include <Eigen/SVD>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace relmod {

namespace {

double frobenius(const CMatrix& x) { return x.norm(); }

SMatrix adjoint(const SMatrix& x) { return SMatrix(x.adjoint()); }

// Polar factor U V^dagger of a square matrix.
CMatrix polar_unitary(const CMatrix& a) {
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

SMatrix from_dense(const CMatrix& a) { return a.sparseView(); }

}  // namespace

SMatrix sparse_kron(const SMatrix& a, const SMatrix& b) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ca = 0; ca < a.outerSize(); ++ca)
    for (SMatrix::InnerIterator ia(a, ca); ia; ++ia)
      for (int cb = 0; cb < b.outerSize(); ++cb)
        for (SMatrix::InnerIterator ib(b, cb); ib; ++ib)
          trip.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                            ia.value() * ib.value());
  SMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SMatrix sparse_identity(Eigen::Index n) {
  SMatrix id(n, n);
  id.setIdentity();
  return id;
}

CMatrix compress_indices(const SMatrix& x, const std::vector<Eigen::Index>& keep) {
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(x.rows()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[static_cast<std::size_t>(keep[i])] = Eigen::Index(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  CMatrix out = CMatrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (SMatrix::InnerIterator it(x, keep[static_cast<std::size_t>(j)]); it; ++it) {
      const Eigen::Index r = pos[static_cast<std::size_t>(it.row())];
      if (r >= 0) out(r, j) = it.value();
    }
  return out;
}

std::vector<Eigen::Index> product_indices(const std::vector<std::vector<Eigen::Index>>& factors,
                                          const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> out{0};
  for (std::size_t f = 0; f < factors.size(); ++f) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * factors[f].size());
    for (Eigen::Index base : out)
      for (Eigen::Index k : factors[f]) next.push_back(base * dims[f] + k);
    out = std::move(next);
  }
  return out;
}

TruncatedCuntz build_truncated_cuntz(int n, Eigen::Index dim) {
  if (n < 1 || dim < Eigen::Index(n) * n)
    throw Error(ErrorCode::DimensionTooSmall,
                "truncated Cuntz family needs n >= 1 and D >= n^2 (n = " + std::to_string(n) +
                    ", D = " + std::to_string(dim) + ")");
  TruncatedCuntz tc;
  tc.n_ = n;
  tc.dim_ = dim;
  for (int j = 0; j < n; ++j) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index k = 0; k < dim; ++k)
      if (n * k + j < dim) trip.emplace_back(n * k + j, k, cplx(1.0, 0.0));
    SMatrix s(dim, dim);
    s.setFromTriplets(trip.begin(), trip.end());
    tc.shifts_.push_back(std::move(s));
  }
  for (Eigen::Index k = 0; n * k + n - 1 < dim; ++k) tc.defect_free_.push_back(k);
  return tc;
}

CuntzRelationReport TruncatedCuntz::relation_residuals() const {
  CuntzRelationReport rep;
  const SMatrix id = sparse_identity(dim_);
  SMatrix sum(dim_, dim_);
  for (int i = 0; i < n_; ++i) {
    sum += shifts_[i] * adjoint(shifts_[i]);
    for (int j = 0; j < n_; ++j) {
      SMatrix x = adjoint(shifts_[i]) * shifts_[j];
      if (i == j) x -= id;
      rep.defect_free_residual = std::max(rep.defect_free_residual, frobenius(compress_indices(x, defect_free_)));
      rep.full_space_defect = std::max(rep.full_space_defect, x.norm());
    }
  }
  sum -= id;
  rep.defect_free_residual = std::max(rep.defect_free_residual, frobenius(compress_indices(sum, defect_free_)));
  rep.full_space_defect = std::max(rep.full_space_defect, sum.norm());
  return rep;
}

SMatrix cuntz_sum_unitary(const TruncatedCuntz& tc) {
  SMatrix w(tc.dim() * tc.dim(), tc.dim() * tc.dim());
  for (int i = 0; i < tc.branching(); ++i) w += sparse_kron(tc.shift(i), adjoint(tc.shift(i)));
  return w;
}

CommutatorReport nonsignalling_check(const SignallingScenario& sc) {
  CommutatorReport rep;
  const SMatrix w_adj = adjoint(sc.w);
  for (const auto& a : sc.alice_generators) {
    const SMatrix moved = sc.w * a * w_adj;
    for (const auto& c : sc.charlie_generators) {
      const SMatrix comm = moved * c - c * moved;
      rep.max_residual = std::max(rep.max_residual, frobenius(compress_indices(comm, sc.defect_free)));
      rep.full_space_residual = std::max(rep.full_space_residual, comm.norm());
      ++rep.pairs;
    }
  }
  return rep;
}

SignallingScenario make_two_factor_scenario(const TruncatedCuntz& tc, const SMatrix& w,
                                            int generators, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index d = tc.dim();
  SignallingScenario sc;
  const SMatrix id = sparse_identity(d);
  for (int g = 0; g < generators; ++g) {
    sc.alice_generators.push_back(sparse_kron(from_dense(random_hermitian(d, rng)), id));
    sc.charlie_generators.push_back(sparse_kron(id, from_dense(random_hermitian(d, rng))));
  }
  sc.w = w;
  sc.defect_free = product_indices({tc.defect_free(), tc.defect_free()}, {d, d});
  return sc;
}

double norm_gap_floor(double epsilon) {
  return (1.0 - epsilon) * std::sqrt(2.0 - std::sqrt(2.0)) - 2.0 * std::sqrt(2.0 * epsilon);
}

double norm_gap_floor_root() {
  const auto r = boost::math::tools::bisect([](double e) { return norm_gap_floor(e); }, 1e-6, 0.5,
                                            boost::math::tools::eps_tolerance<double>(50));
  return 0.5 * (r.first + r.second);
}

void to_json(nlohmann::json& j, const NormGapReport& r) {
  j = nlohmann::json{{"epsilon", r.epsilon},   {"samples", r.samples},
                     {"floor", r.floor},       {"min_gap", r.min_gap},
                     {"slack", r.slack},       {"pass", r.pass},
                     {"dim", r.dim},           {"adversarial_gap", r.adversarial_gap}};
}

NormGapReport norm_gap_experiment(double epsilon, int samples, Eigen::Index dim,
                                  double tail_decay, std::uint64_t seed, int n) {
  if (!(epsilon > 0.0 && epsilon <= 0.05))
    throw Error(ErrorCode::ParameterViolation, "norm-gap experiment needs 0 < epsilon <= 0.05");
  if (n < 2) throw Error(ErrorCode::ParameterViolation, "norm-gap experiment needs n >= 2");
  if (!(tail_decay > 0.0 && tail_decay < 1.0))
    throw Error(ErrorCode::ParameterViolation, "tail decay must lie in (0, 1)");
  // chi_1 = e_1 and chi_2 = e_2 must be defect-free; psi_1 then lives on e_n, e_{2n+1}.
  if (dim < Eigen::Index(n) * n || 3 * n - 1 >= dim)
    throw Error(ErrorCode::TruncationBudgetExceeded,
                "dimension " + std::to_string(dim) + " too small for the norm-gap construction");
  const TruncatedCuntz tc = build_truncated_cuntz(n, dim);

  CVector psi1 = CVector::Zero(dim);
  psi1(n) = 1.0 / std::sqrt(2.0);
  psi1(2 * n + 1) = 1.0 / std::sqrt(2.0);
  // Orthonormal basis with psi_1 first.
  CMatrix seed_cols(dim, dim + 1);
  seed_cols.col(0) = psi1;
  seed_cols.rightCols(dim) = CMatrix::Identity(dim, dim);
  Eigen::HouseholderQR<CMatrix> qr(seed_cols);
  CMatrix basis = qr.householderQ() * CMatrix::Identity(dim, dim);
  basis.col(0) *= psi1.dot(basis.col(0)) / std::abs(psi1.dot(basis.col(0)));

  // c_1 = 1 - eps, c_i proportional to q^{i-1} afterwards, unit norm.
  RVector c(dim);
  c(0) = 1.0 - epsilon;
  double tail = 0.0, infinite_tail = 0.0;
  for (Eigen::Index i = 1; i < dim; ++i) tail += std::pow(tail_decay, 2.0 * double(i));
  infinite_tail = tail_decay * tail_decay / (1.0 - tail_decay * tail_decay);
  const double kappa2 = (1.0 - c(0) * c(0)) / tail;
  for (Eigen::Index i = 1; i < dim; ++i) c(i) = std::sqrt(kappa2) * std::pow(tail_decay, double(i));

  // Omega = sum_i c_i e_i (x) psi_i as the matrix sum_i c_i e_i psi_i^T.
  const CMatrix m = c.cast<cplx>().asDiagonal() * basis.transpose();
  CMatrix w_omega = CMatrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    const CMatrix s = CMatrix(tc.shift(j));
    w_omega += s * m * s;
  }
  auto gap = [&](const CMatrix& up, const CMatrix& u) { return (up * m * u.transpose() - w_omega).norm(); };

  NormGapReport rep;
  rep.epsilon = epsilon;
  rep.samples = samples;
  rep.dim = dim;
  rep.floor = norm_gap_floor(epsilon);
  // Mass the geometric tail would carry beyond the truncation, with the
  // normalisation of the untruncated sequence, plus rounding.
  const double lost = (1.0 - c(0) * c(0)) * std::max(0.0, 1.0 - tail / infinite_tail);
  rep.slack = 2.0 * std::sqrt(lost) + 1e-12;
  rep.min_gap = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const CMatrix up = haar_unitary(dim, rng);
    const CMatrix u = haar_unitary(dim, rng);
    rep.min_gap = std::min(rep.min_gap, gap(up, u));
  }

  // Alternating maximisation of Re <u' M u^T, W Omega> from several starts.
  rep.adversarial_gap = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 4; ++start) {
    CMatrix u = start == 0 ? CMatrix(CMatrix::Identity(dim, dim)) : haar_unitary(dim, rng);
    CMatrix up = CMatrix::Identity(dim, dim);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 500; ++it) {
      up = polar_unitary(w_omega * (m * u.transpose()).adjoint());
      const CMatrix a = (up * m).adjoint() * w_omega;
      // max Re tr(A V) over unitary V is attained at V = (polar A)^dagger; u = conj(V).
      u = polar_unitary(a).adjoint().conjugate();
      const double g = gap(up, u);
      if (prev - g < 1e-14) {
        prev = g;
        break;
      }
      prev = g;
    }
    rep.adversarial_gap = std::min(rep.adversarial_gap, prev);
  }
  const double worst = std::min(rep.min_gap, rep.adversarial_gap);
  rep.pass = worst >= rep.floor - rep.slack;
  return rep;
}

FactorizationReport product_reconstruction(int n, Eigen::Index outer_dim, Eigen::Index middle_dim) {
  const TruncatedCuntz a = build_truncated_cuntz(n, outer_dim);
  const TruncatedCuntz mid = build_truncated_cuntz(n, middle_dim);
  const SMatrix id_o = sparse_identity(outer_dim), id_m = sparse_identity(middle_dim);
  const Eigen::Index dim = outer_dim * middle_dim * outer_dim;
  SMatrix up(dim, dim), u(dim, dim), w(dim, dim);
  for (int i = 0; i < n; ++i) {
    const SMatrix s = a.shift(i), s_adj = adjoint(a.shift(i));
    const SMatrix t = mid.shift(i), t_adj = adjoint(mid.shift(i));
    up += sparse_kron(sparse_kron(s, t_adj), id_o);  // u'_i c_i^dagger
    u += sparse_kron(sparse_kron(id_o, t), s_adj);   // c_i u_i
    w += sparse_kron(sparse_kron(s, id_m), s_adj);   // u'_i u_i
  }
  const auto keep = product_indices({a.defect_free(), mid.defect_free(), a.defect_free()},
                                    {outer_dim, middle_dim, outer_dim});
  const auto m = static_cast<Eigen::Index>(keep.size());
  const CMatrix id = CMatrix::Identity(m, m);
  auto unitarity = [&](const SMatrix& x) {
    const SMatrix xa = adjoint(x);
    return frobenius(compress_indices(xa * x, keep) - id) + frobenius(compress_indices(x * xa, keep) - id);
  };
  FactorizationReport rep;
  rep.n = n;
  rep.middle_dim = middle_dim;
  const SMatrix diff = up * u - w;
  rep.residual = frobenius(compress_indices(diff, keep));
  rep.unitarity_u = unitarity(u);
  rep.unitarity_u_prime = unitarity(up);
  rep.pass = rep.residual <= 1e-12 && rep.unitarity_u <= 1e-12 && rep.unitarity_u_prime <= 1e-12;
  return rep;
}

ProductGapCertificate product_form_gap(int n, Eigen::Index dim) {
  const TruncatedCuntz tc = build_truncated_cuntz(n, dim);
  const SMatrix w = cuntz_sum_unitary(tc);
  const auto keep = product_indices({tc.defect_free(), tc.defect_free()}, {dim, dim});
  const CMatrix wc = compress_indices(w, keep);
  const Eigen::Index d = tc.defect_free_dim();
  // Realignment: R((i1, j1), (i2, j2)) = W((i1, i2), (j1, j2)); the Frobenius
  // distance to the nearest A (x) B is the norm of the singular values past the first.
  CMatrix r(d * d, d * d);
  for (Eigen::Index i1 = 0; i1 < d; ++i1)
    for (Eigen::Index i2 = 0; i2 < d; ++i2)
      for (Eigen::Index j1 = 0; j1 < d; ++j1)
        for (Eigen::Index j2 = 0; j2 < d; ++j2) r(i1 * d + j1, i2 * d + j2) = wc(i1 * d + i2, j1 * d + j2);
  Eigen::BDCSVD<CMatrix> svd(r);
  const RVector sv = svd.singularValues();
  ProductGapCertificate cert;
  cert.n = n;
  cert.dim = dim;
  double rest = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > 1e-12 * sv(0)) cert.singular_values.push_back(sv(k));
    if (k > 0) rest += sv(k) * sv(k);
  }
  cert.relative_distance = std::sqrt(rest) / double(d);
  cert.certified = cert.relative_distance > 0.1;
  return cert;
}

}  // namespace relmod
