#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "domcheck/hierarchy.hpp"
#include "domcheck/majorization.hpp"
#include "domcheck/random.hpp"

namespace domcheck {

/// The order interval [0, a].
class OrderInterval {
 public:
  explicit OrderInterval(ComplexMatrix upper, const ToleranceConfig& tol = {}) : upper_(std::move(upper)) {
    require_square(upper_, "interval endpoint");
    if (!is_psd(upper_, tol).holds) throw Error(ErrorCode::NotPSD, "interval endpoint is not PSD");
  }

  const ComplexMatrix& upper() const { return upper_; }
  Eigen::Index dim() const { return upper_.rows(); }

 private:
  ComplexMatrix upper_;
};

/// Cut level n in dimension dim: P_n projects onto the first n coordinates.
struct Truncation {
  Eigen::Index n = 0;
  Eigen::Index dim = 0;

  Truncation(Eigen::Index n_, Eigen::Index dim_) : n(n_), dim(dim_) {
    if (n < 0 || n > dim) throw Error(ErrorCode::BadRange, "cut level outside [0, dim]");
  }

  ComplexMatrix p() const {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m.diagonal().head(n).setOnes();
    return m;
  }
  ComplexMatrix p_perp() const { return ComplexMatrix::Identity(dim, dim) - p(); }
};

struct MembershipVerdict {
  bool member = false;
  double min_eigenvalue = 0.0;  // smallest of lambda_min(x), lambda_min(a - x)
  Certificate certificate;
  std::optional<std::size_t> index;  // which generator of a positive solid

  explicit operator bool() const { return member; }
};

inline MembershipVerdict interval_member(const OrderInterval& interval, const ComplexMatrix& x,
                                         const ToleranceConfig& tol = {}) {
  require_same_shape(interval.upper(), x, "interval_member");
  MembershipVerdict v;
  const auto lower = is_psd(x, tol);
  if (!lower.holds) {
    v.min_eigenvalue = lower.min_eigenvalue;
    v.certificate = lower.certificate;
    v.certificate.note = "x is not PSD";
    return v;
  }
  const auto upper = is_psd(interval.upper() - x, tol);
  v.min_eigenvalue = std::min(lower.min_eigenvalue, upper.min_eigenvalue);
  v.member = upper.holds;
  v.certificate = upper.holds ? Certificate::structural("0 <= x <= a") : upper.certificate;
  if (!upper.holds) v.certificate.note = "a - x is not PSD";
  return v;
}

/// Returns w with x = a^{1/4} w a^{1/4}, namely w = a^{+1/4} x a^{+1/4} on the
/// support of a. Membership gives 0 <= w <= a^{1/2}, so ||w|| <= ||a||^{1/2}.
inline ComplexMatrix interval_parameterize(const OrderInterval& interval, const ComplexMatrix& x,
                                           const ToleranceConfig& tol = {}) {
  const auto member = interval_member(interval, x, tol);
  if (!member.member)
    throw Error(ErrorCode::NotMember, "x is not in [0, a] (eigenvalue " + std::to_string(member.min_eigenvalue) + ")");
  const ComplexMatrix r = pseudo_inverse_root(interval.upper(), 0.25, tol);
  return hermitian_part(r * x * r);
}

/// a |-> x* a x.
inline SuperOperator multiplication_operator(const ComplexMatrix& x) {
  return SuperOperator::builtin(BuiltinKind::multiplication, 0, x);
}

struct BallImageReport {
  bool holds = true;
  int samples = 0;
  double worst_member_eigenvalue = 0.0;  // most negative eigenvalue seen in membership checks
  double worst_preimage_error = 0.0;     // relative reconstruction error of the preimage
};

/// Sampling check of [0, a*a] = M_a(ball_+) for PSD a, in both directions.
inline BallImageReport interval_equals_ball_image(const ComplexMatrix& a, int samples = 100,
                                                  const ToleranceConfig& tol = {}) {
  if (!is_psd(a, tol).holds) throw Error(ErrorCode::NotPSD, "endpoint must be PSD");
  const Eigen::Index n = a.rows();
  const OrderInterval interval(hermitian_part(a.adjoint() * a), tol);
  const auto m = multiplication_operator(a);
  const ComplexMatrix a_pinv = pseudo_inverse_root(a, 1.0, tol);
  const ComplexMatrix support = support_projection(a, tol);
  const double scale = std::max(1.0, frobenius_norm(interval.upper()));
  Rng rng = derived_rng(tol.seed, 0xba11);

  BallImageReport report;
  auto record_member = [&](const ComplexMatrix& x) {
    const auto v = interval_member(interval, x, tol);
    report.worst_member_eigenvalue = std::min(report.worst_member_eigenvalue, v.min_eigenvalue);
    report.holds = report.holds && v.member;
  };
  auto record_preimage = [&](const ComplexMatrix& x) {
    const ComplexMatrix w = hermitian_part(a_pinv * x * a_pinv);
    const bool in_ball = is_psd(w, tol).holds && is_psd(ComplexMatrix::Identity(n, n) - w, tol).holds;
    const double err = frobenius_norm(m.apply(w) - x) / scale;
    report.worst_preimage_error = std::max(report.worst_preimage_error, err);
    report.holds = report.holds && in_ball && err <= tol.tol_cert;
  };

  for (int s = 0; s < samples; ++s) {
    ++report.samples;
    // ball image lands in the interval
    ComplexMatrix w = random_psd(rng, n);
    w /= std::max(1e-300, operator_norm(w, tol));
    w *= uniform(rng);
    const ComplexMatrix image = m.apply(w);
    record_member(image);
    record_preimage(image);

    // an interval element drawn without reference to the ball: a supported PSD
    // matrix scaled to touch the boundary of [0, a*a]
    ComplexMatrix y = support * random_psd(rng, n) * support;
    const double reach = operator_norm(hermitian_part(a_pinv * y * a_pinv), tol);
    if (reach <= 0) continue;
    y *= uniform(rng) / reach;
    record_member(y);
    record_preimage(y);
  }
  return report;
}

/// Membership in the positive solid of a finite set: 0 <= x <= y for some y in M.
inline MembershipVerdict psol_member(const std::vector<ComplexMatrix>& generators, const ComplexMatrix& x,
                                     const ToleranceConfig& tol = {}) {
  MembershipVerdict best;
  best.min_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const auto& y : generators) require_same_shape(y, x, "psol_member");
  const auto lower = is_psd(x, tol);
  if (!lower.holds) {
    best.min_eigenvalue = lower.min_eigenvalue;
    best.certificate = lower.certificate;
    best.certificate.note = "x is not PSD";
    return best;
  }
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto gap = is_psd(generators[i] - x, tol);
    if (gap.min_eigenvalue > best.min_eigenvalue) {
      best.min_eigenvalue = std::min(gap.min_eigenvalue, lower.min_eigenvalue);
      best.certificate = gap.holds ? Certificate::structural("x <= generator " + std::to_string(i)) : gap.certificate;
      best.index = i;
    }
    if (gap.holds) {
      best.member = true;
      return best;
    }
  }
  best.index.reset();
  return best;
}

struct Corners {
  ComplexMatrix q;        // P_n x P_n
  ComplexMatrix r;        // P_n^perp x P_n^perp
  ComplexMatrix offdiag;  // everything else
};

inline Corners corner_truncations(const ComplexMatrix& x, const Truncation& t) {
  require_square(x, "corner_truncations");
  if (x.rows() != t.dim) throw Error(ErrorCode::DimensionMismatch, "truncation dimension differs from x");
  const Eigen::Index n = t.n, m = t.dim - t.n;
  Corners c{ComplexMatrix::Zero(t.dim, t.dim), ComplexMatrix::Zero(t.dim, t.dim), ComplexMatrix::Zero(t.dim, t.dim)};
  c.q.topLeftCorner(n, n) = x.topLeftCorner(n, n);
  c.r.bottomRightCorner(m, m) = x.bottomRightCorner(m, m);
  c.offdiag.topRightCorner(n, m) = x.topRightCorner(n, m);
  c.offdiag.bottomLeftCorner(m, n) = x.bottomLeftCorner(m, n);
  return c;
}

struct OffdiagReport {
  double lhs = 0.0;          // ||T(x - Qx - Rx)||^2
  double rhs = 0.0;          // 4 ||T Qx|| ||T Rx||
  bool holds = false;
  double general_rhs = 0.0;  // 16 nu ||T Qx|| ||T Rx||
  bool general_holds = false;
  double ratio = 0.0;        // lhs / rhs; 0 when rhs vanishes
  double norm_tq = 0.0, norm_tr = 0.0;
  bool zero_denominator = false;

  double t_star = 0.0;               // (||T Rx|| / ||T Qx||)^{1/4}
  double interpolation_norm = 0.0;   // ||T a(t*)||, a(t) = t^2 Qx + t^-2 Rx
  double interpolation_bound = 0.0;  // t*^2 ||T Qx|| + t*^-2 ||T Rx||
  bool interpolation_holds = false;  // ||T b|| <= ||T a(t*)||

  double scalar_lhs = 0.0;  // ||x - Qx - Rx||
  double scalar_rhs = 0.0;  // 2 ||Rx||^{1/2} ||Qx||^{1/2}
  bool scalar_holds = false;

  Status map_status = Status::inconclusive;
};

/// Off-diagonal truncation inequality for a positive map T and PSD x.
inline OffdiagReport verify_offdiag_inequality(const SuperOperator& t, const ComplexMatrix& x, const Truncation& cut,
                                               const Gauge& gauge, const ToleranceConfig& tol = {},
                                               const SpaceConstants& constants = {}) {
  if (x.rows() != t.dim_in() || x.cols() != t.dim_in())
    throw Error(ErrorCode::DimensionMismatch, "x does not match the input dimension of T");
  if (!is_psd(x, tol).holds) throw Error(ErrorCode::NotPSD, "x must be PSD");
  OffdiagReport r;
  r.map_status = check_positive(t, tol).status;

  const Corners c = corner_truncations(x, cut);
  auto norm = [&](const ComplexMatrix& m) { return symmetric_norm(m, gauge, tol); };
  const double tb = norm(t.apply(c.offdiag));
  r.norm_tq = norm(t.apply(c.q));
  r.norm_tr = norm(t.apply(c.r));
  r.lhs = tb * tb;
  r.rhs = 4.0 * r.norm_tq * r.norm_tr;
  r.general_rhs = 16.0 * constants.normality * r.norm_tq * r.norm_tr;

  const double slack = tol.tol_cert * std::max(1.0, r.rhs);
  r.zero_denominator = r.norm_tq <= 0.0 || r.norm_tr <= 0.0;
  if (r.zero_denominator) {
    r.holds = r.general_holds = r.lhs <= tol.tol_cert;
    r.interpolation_holds = r.holds;
  } else {
    r.holds = r.lhs <= r.rhs + slack;
    r.general_holds = r.lhs <= r.general_rhs + slack;
    r.ratio = r.lhs / r.rhs;
    r.t_star = std::pow(r.norm_tr / r.norm_tq, 0.25);
    const double t2 = r.t_star * r.t_star;
    r.interpolation_norm = norm(t.apply(t2 * c.q + c.r / t2));
    r.interpolation_bound = t2 * r.norm_tq + r.norm_tr / t2;
    r.interpolation_holds = tb <= r.interpolation_norm + tol.tol_cert * std::max(1.0, r.interpolation_norm);
  }

  r.scalar_lhs = norm(c.offdiag);
  r.scalar_rhs = 2.0 * std::sqrt(norm(c.r)) * std::sqrt(norm(c.q));
  r.scalar_holds = r.scalar_lhs <= r.scalar_rhs + tol.tol_cert * std::max(1.0, r.scalar_rhs);
  return r;
}

/// Sampled lower estimates of ||T(I - Q_n)||, ||T R_n|| and ||T Q_n|| as maps
/// (S_E, gauge) -> (S_E, gauge), and the bound
/// ||T(I - Q_n)|| <= ||T R_n|| + 8 nu^{1/2} ||T R_n||^{1/2} ||T Q_n||^{1/2}.
/// All three norms are estimates from below, so `holds` is indicative only.
struct TruncationNormEstimate {
  double norm_complement = 0.0;  // ||T(I - Q_n)||
  double norm_r = 0.0;
  double norm_q = 0.0;
  double constant = 0.0;
  double bound = 0.0;
  bool holds = false;
  bool estimate = true;
  int samples = 0;
};

inline TruncationNormEstimate truncation_norm_estimate(const SuperOperator& t, const Truncation& cut,
                                                       const Gauge& gauge, const ToleranceConfig& tol = {},
                                                       int samples = 256, int refinement_steps = 64,
                                                       const SpaceConstants& constants = {}) {
  if (cut.dim != t.dim_in()) throw Error(ErrorCode::DimensionMismatch, "truncation dimension differs from T");
  const Eigen::Index n = t.dim_in();
  auto norm = [&](const ComplexMatrix& m) { return symmetric_norm(m, gauge, tol); };
  const auto complement = [&](const ComplexMatrix& y) { return ComplexMatrix(y - corner_truncations(y, cut).q); };
  const auto q_part = [&](const ComplexMatrix& y) { return corner_truncations(y, cut).q; };
  const auto r_part = [&](const ComplexMatrix& y) { return corner_truncations(y, cut).r; };

  auto estimate = [&](auto&& restrict, std::uint64_t stream) {
    Rng rng = derived_rng(tol.seed, stream);
    auto ratio = [&](const ComplexMatrix& y) {
      const double ny = norm(y);
      return ny > 0 ? norm(t.apply(restrict(y))) / ny : 0.0;
    };
    ComplexMatrix best_y = matrix_unit(n, 0, 0);
    double best = ratio(best_y);
    auto consider = [&](const ComplexMatrix& y) {
      const double v = ratio(y);
      if (v > best) best = v, best_y = y;
    };
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) consider(matrix_unit(n, i, j));
    for (int s = 0; s < samples; ++s) {
      // alternate full-rank and rank-one samples
      if (s % 2) consider(random_gaussian(rng, n, n));
      else consider(random_gaussian(rng, n, 1) * random_gaussian(rng, n, 1).adjoint());
    }
    // local refinement around the best sample
    double step = 0.5 * frobenius_norm(best_y);
    for (int it = 0; it < refinement_steps; ++it) {
      const ComplexMatrix y = best_y + step * random_gaussian(rng, n, n) / std::sqrt(double(n * n));
      const double v = ratio(y);
      if (v > best) best = v, best_y = y;
      else step *= 0.9;
    }
    return best;
  };

  TruncationNormEstimate e;
  e.samples = samples;
  e.norm_complement = estimate(complement, 1);
  e.norm_r = estimate(r_part, 2);
  e.norm_q = estimate(q_part, 3);
  e.constant = 8.0 * std::sqrt(constants.normality);
  e.bound = e.norm_r + e.constant * std::sqrt(e.norm_r * e.norm_q);
  e.holds = e.norm_complement <= e.bound + tol.tol_cert * std::max(1.0, e.bound);
  return e;
}

namespace detail {

inline bool in_unit_interval(const ComplexMatrix& m, const ToleranceConfig& tol) {
  return is_psd(m, tol).holds && is_psd(ComplexMatrix::Identity(m.rows(), m.cols()) - m, tol).holds;
}

}  // namespace detail

/// z x z* >= z x y x z* for x, y in [0, 1].
inline PsdCheck comparison_lemma_check(const ComplexMatrix& z, const ComplexMatrix& x, const ComplexMatrix& y,
                                       const ToleranceConfig& tol = {}) {
  require_square(x, "x");
  require_same_shape(x, y, "comparison_lemma_check");
  if (z.cols() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "z does not match x");
  if (!detail::in_unit_interval(x, tol)) throw Error(ErrorCode::BadRange, "x is not in [0, 1]");
  if (!detail::in_unit_interval(y, tol)) throw Error(ErrorCode::BadRange, "y is not in [0, 1]");
  const ComplexMatrix zx = z * x;
  return is_psd(hermitian_part(zx * z.adjoint() - zx * y * zx.adjoint()), tol);
}

struct MonotoneChain {
  double c = 0.0;
  std::vector<ComplexMatrix> b;     // b_0, ..., b_n
  std::vector<ComplexMatrix> a;     // a_0 >= a_1 >= ... >= a_n
  std::vector<double> gaps;         // ||x (a_{k-1} - a_k) x||, k = 1..n
  std::vector<ComplexVector> xi;    // the chosen unit vectors with ||x xi|| >= 1
  bool monotone = false;            // every step certified by the comparison lemma
  bool gaps_exceed = false;         // every gap > 2/3 - tol_cert
};

/// Chain a_0 >= ... >= a_n in the positive unit ball with ||x (a_{k-1} - a_k) x|| > 2/3.
/// b_k = c * (projection onto span(eta_1, ..., eta_{n-k})), a_k = b_0 ... b_k ... b_0.
inline MonotoneChain monotone_chain(const ComplexMatrix& x, int n, const ToleranceConfig& tol = {}) {
  if (n < 1) throw Error(ErrorCode::BadRange, "chain length must be at least 1");
  if (!is_psd(x, tol).holds) throw Error(ErrorCode::NotPSD, "x must be PSD");
  const auto dec = eig_hermitian(x, tol);
  const Eigen::Index dim = x.rows();
  MonotoneChain out;
  // eigenvectors with eigenvalue >= 1 satisfy 1 <= ||x xi|| <= ||x^2 xi|| <= ...
  // and x^k xi_i stays orthogonal to x^l xi_j
  for (Eigen::Index i = 0; i < dec.eigenvalues.size() && static_cast<int>(out.xi.size()) < n; ++i)
    if (dec.eigenvalues(i) >= 1.0 - tol.tol_eig) out.xi.push_back(dec.eigenvectors.col(i));
  if (static_cast<int>(out.xi.size()) < n)
    throw Error(ErrorCode::InsufficientSpectrum, "x has " + std::to_string(out.xi.size()) +
                                                     " eigenvalues >= 1, chain needs " + std::to_string(n));
  std::vector<ComplexVector> eta;
  for (const auto& v : out.xi) {
    const ComplexVector xv = x * v;
    eta.push_back(xv / xv.norm());
  }

  out.c = std::pow(2.0 / 3.0, 1.0 / (2.0 * n + 1.0));
  for (int k = 0; k <= n; ++k) {
    ComplexMatrix bk = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < n - k; ++i) bk += eta[static_cast<std::size_t>(i)] * eta[static_cast<std::size_t>(i)].adjoint();
    out.b.push_back(out.c * bk);
  }

  ComplexMatrix prefix = ComplexMatrix::Identity(dim, dim);  // b_0 ... b_{k-1}
  for (int k = 0; k <= n; ++k) {
    const ComplexMatrix& bk = out.b[static_cast<std::size_t>(k)];
    out.a.push_back(hermitian_part(prefix * bk * prefix.adjoint()));
    prefix = prefix * bk;
  }

  // a_{k-1} = z b_{k-1} z* and a_k = z b_{k-1} b_k b_{k-1} z* with z = b_0 ... b_{k-2}
  out.monotone = true;
  ComplexMatrix z = ComplexMatrix::Identity(dim, dim);
  for (int k = 1; k <= n; ++k) {
    const auto& prev = out.b[static_cast<std::size_t>(k - 1)];
    const auto& cur = out.b[static_cast<std::size_t>(k)];
    out.monotone = out.monotone && comparison_lemma_check(z, prev, cur, tol).holds;
    z = z * prev;
    out.gaps.push_back(operator_norm(x * (out.a[static_cast<std::size_t>(k - 1)] - out.a[static_cast<std::size_t>(k)]) * x, tol));
  }
  out.gaps_exceed = std::all_of(out.gaps.begin(), out.gaps.end(), [&](double g) { return g > 2.0 / 3.0 - tol.tol_cert; });
  return out;
}

}  // namespace domcheck
