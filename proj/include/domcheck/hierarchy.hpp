#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "domcheck/random.hpp"
#include "domcheck/superoperator.hpp"

namespace domcheck {

/// How a yes/no question about a map was settled.
///  certified    - holds, by an exact rule or a re-verifiable certificate
///  heuristic    - no violation found by a bounded search
///  violated     - fails, with a re-verifiable witness
///  inconclusive - neither a proof nor a witness within the budget
enum class Status { certified, heuristic, violated, inconclusive };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::certified: return "certified";
    case Status::heuristic: return "heuristic";
    case Status::violated: return "violated";
    case Status::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct MapVerdict {
  Status status = Status::inconclusive;
  std::string rule;  // what settled the question
  double value = 0.0;
  Certificate certificate;

  bool holds() const { return status == Status::certified || status == Status::heuristic; }
};

struct SeesawOptions {
  int alternations = 200;
  double convergence = 1e-10;
};

struct DykstraOptions {
  int plateau_window = 500;
  double plateau_improvement = 1e-12;
  int witness_steps = 400;
  int projection_sweeps = 400;
};

namespace detail {

inline void require_hermiticity_preserving(const SuperOperator& t) {
  if (!t.hermiticity_preserving())
    throw Error(ErrorCode::NotHermitian, "map is not Hermiticity-preserving (Choi matrix not Hermitian)");
}

/// Orthonormal basis (columns) of span(cols), dropping dependent directions.
inline ComplexMatrix orthonormal_columns(const ComplexMatrix& cols) {
  ComplexMatrix q(cols.rows(), 0);
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    ComplexVector v = cols.col(c);
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < q.cols(); ++j) v -= q.col(j) * q.col(j).dot(v);
    const double norm = v.norm();
    if (norm <= 1e-12 * std::max(1.0, original)) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / norm;
  }
  return q;
}

struct SeesawResult {
  double value = std::numeric_limits<double>::infinity();
  ComplexVector zeta;
  std::vector<ComplexVector> left, right;  // zeta = sum_s left[s] (x) right[s]
  std::int64_t alternations = 0;
};

/// Minimizes <zeta, J zeta> over unit zeta of Schmidt rank <= k. With one
/// factor's span fixed, the optimum over the other factors is the minimal
/// eigenvector of the compressed form, so each half-step is exact.
inline SeesawResult seesaw_min(const ComplexMatrix& choi, Eigen::Index din, Eigen::Index dout, int k,
                               const ToleranceConfig& tol, const SeesawOptions& opt = {}) {
  SeesawResult best;
  for (int r = 0; r < tol.restarts; ++r) {
    Rng rng = derived_rng(tol.seed, static_cast<std::uint64_t>(r));
    ComplexMatrix right = random_gaussian(rng, dout, k);
    ComplexMatrix left;
    ComplexVector zeta;
    double value = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.alternations; ++it) {
      ++best.alternations;
      // right factors fixed: zeta = sum_s xi_s (x) eta_s, eta orthonormal
      const ComplexMatrix eta = orthonormal_columns(right);
      ComplexMatrix lift = ComplexMatrix::Zero(din * dout, din * eta.cols());
      for (Eigen::Index s = 0; s < eta.cols(); ++s)
        for (Eigen::Index i = 0; i < din; ++i) lift.col(s * din + i).segment(i * dout, dout) = eta.col(s);
      auto dec = eig_hermitian(lift.adjoint() * choi * lift, tol);
      ComplexVector v = dec.eigenvectors.col(dec.eigenvalues.size() - 1);
      left.resize(din, eta.cols());
      for (Eigen::Index s = 0; s < eta.cols(); ++s) left.col(s) = v.segment(s * din, din);

      // left factors fixed
      const ComplexMatrix xi = orthonormal_columns(left);
      lift = ComplexMatrix::Zero(din * dout, dout * xi.cols());
      for (Eigen::Index s = 0; s < xi.cols(); ++s)
        for (Eigen::Index j = 0; j < dout; ++j)
          for (Eigen::Index i = 0; i < din; ++i) lift(i * dout + j, s * dout + j) = xi(i, s);
      dec = eig_hermitian(lift.adjoint() * choi * lift, tol);
      v = dec.eigenvectors.col(dec.eigenvalues.size() - 1);
      right.resize(dout, xi.cols());
      for (Eigen::Index s = 0; s < xi.cols(); ++s) right.col(s) = v.segment(s * dout, dout);
      left = xi;
      zeta = lift * v;

      const double next = dec.min();
      const bool done = std::abs(value - next) < opt.convergence;
      value = next;
      if (done) break;
    }
    if (value < best.value) {
      best.value = value;
      best.zeta = zeta;
      best.left.clear();
      best.right.clear();
      for (Eigen::Index s = 0; s < left.cols(); ++s) {
        best.left.push_back(left.col(s));
        best.right.push_back(right.col(s));
      }
    }
  }
  if (best.zeta.size()) best.value = (best.zeta.adjoint() * choi * best.zeta)(0, 0).real();
  return best;
}

}  // namespace detail

inline double choi_threshold(const SuperOperator& t, const ToleranceConfig& tol) {
  return psd_threshold(operator_norm(t.choi(), tol), tol);
}

/// Choi criterion.
inline MapVerdict check_cp(const SuperOperator& t, const ToleranceConfig& tol = {}) {
  detail::require_hermiticity_preserving(t);
  const auto psd = is_psd(t.choi(), tol);
  MapVerdict v;
  v.value = psd.min_eigenvalue;
  v.rule = "Choi matrix PSD test";
  v.status = psd.holds ? Status::certified : Status::violated;
  v.certificate = psd.holds ? Certificate::structural("Choi matrix is PSD") : psd.certificate;
  return v;
}

/// Transpose on the input factor of the Choi matrix.
inline ComplexMatrix choi_partial_transpose(const SuperOperator& t) {
  return partial_transpose_first(t.choi(), t.dim_in(), t.dim_out());
}

/// CP after composing with transposition: J^Gamma PSD.
inline bool is_co_cp(const SuperOperator& t, const ToleranceConfig& tol = {}) {
  return is_psd(choi_partial_transpose(t), tol).holds;
}

namespace detail {

inline Certificate block_witness(const SeesawResult& r, int k) {
  Certificate c;
  c.kind = k == 1 ? CertificateKind::product_witness : CertificateKind::schmidt_witness;
  c.vectors.push_back(r.zeta);
  for (std::size_t s = 0; s < r.left.size(); ++s) {
    c.vectors.push_back(r.left[s]);
    c.vectors.push_back(r.right[s]);
  }
  c.value = r.value;
  c.budget = r.alternations;
  return c;
}

inline MapVerdict schmidt_search(const SuperOperator& t, int k, const ToleranceConfig& tol) {
  const auto r = seesaw_min(t.choi(), t.dim_in(), t.dim_out(), k, tol);
  MapVerdict v;
  v.value = r.value;
  if (r.value < choi_threshold(t, tol)) {
    v.status = Status::violated;
    v.rule = k == 1 ? "see-saw over product vectors" : "see-saw over Schmidt-rank-" + std::to_string(k) + " vectors";
    v.certificate = block_witness(r, k);
  } else {
    v.status = Status::heuristic;
    v.rule = "see-saw found no violation (" + std::to_string(tol.restarts) + " restarts)";
    v.certificate.kind = CertificateKind::none;
    v.certificate.value = r.value;
    v.certificate.budget = r.alternations;
  }
  return v;
}

inline std::optional<std::string> positivity_rule(const SuperOperator& t, const ToleranceConfig& tol) {
  if (const auto& b = t.builtin_spec()) {
    switch (b->kind) {
      case BuiltinKind::transpose: return "transposition preserves PSD";
      case BuiltinKind::symmetrization: return "average of identity and transposition";
      case BuiltinKind::conjugation:
      case BuiltinKind::multiplication: return "congruence preserves PSD";
      case BuiltinKind::schur:
        if (is_psd(b->parameter, tol).holds) return "Schur multiplier with PSD symbol";
        break;
      default: break;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Block positivity of J(T): <xi (x) eta, J xi (x) eta> >= 0 for all product vectors.
inline MapVerdict check_positive(const SuperOperator& t, const ToleranceConfig& tol = {}) {
  detail::require_hermiticity_preserving(t);
  if (const auto rule = detail::positivity_rule(t, tol)) {
    MapVerdict v;
    v.status = Status::certified;
    v.rule = "builtin: " + *rule;
    v.certificate = Certificate::structural(*rule);
    return v;
  }
  if (const auto cp = check_cp(t, tol); cp.status == Status::certified) {
    MapVerdict v = cp;
    v.rule = "completely positive";
    return v;
  }
  if (is_co_cp(t, tol)) {
    MapVerdict v;
    v.status = Status::certified;
    v.rule = "completely copositive (Choi partial transpose PSD)";
    v.certificate = Certificate::structural(v.rule);
    return v;
  }
  return detail::schmidt_search(t, 1, tol);
}

inline MapVerdict check_k_positive(const SuperOperator& t, int k, const ToleranceConfig& tol = {}) {
  detail::require_hermiticity_preserving(t);
  const int kmax = static_cast<int>(std::min(t.dim_in(), t.dim_out()));
  if (k < 1 || k > kmax)
    throw Error(ErrorCode::BadK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  if (k == kmax) return check_cp(t, tol);
  if (k == 1) return check_positive(t, tol);
  if (auto cp = check_cp(t, tol); cp.status == Status::certified) {
    cp.rule = "completely positive";
    return cp;
  }
  return detail::schmidt_search(t, k, tol);
}

/// Re-check a product/Schmidt witness: zeta is a unit vector equal to
/// sum_s left_s (x) right_s with at most k terms, and <zeta, J zeta> = value < 0.
inline bool verify_block_witness(const SuperOperator& t, const Certificate& c, int k, double abs_tol = 1e-10) {
  if (c.kind != CertificateKind::product_witness && c.kind != CertificateKind::schmidt_witness) return false;
  if (c.vectors.empty() || (c.vectors.size() - 1) % 2 != 0) return false;
  const auto terms = static_cast<int>((c.vectors.size() - 1) / 2);
  if (terms > k) return false;
  const ComplexVector& zeta = c.vectors.front();
  if (zeta.size() != t.dim_in() * t.dim_out() || std::abs(zeta.norm() - 1.0) > 1e-9) return false;
  ComplexVector rebuilt = ComplexVector::Zero(zeta.size());
  for (int s = 0; s < terms; ++s) {
    const auto& l = c.vectors[static_cast<std::size_t>(1 + 2 * s)];
    const auto& r = c.vectors[static_cast<std::size_t>(2 + 2 * s)];
    if (l.size() != t.dim_in() || r.size() != t.dim_out()) return false;
    rebuilt += kron(l, r);
  }
  if ((rebuilt - zeta).norm() > 1e-9) return false;
  const double q = (zeta.adjoint() * t.choi() * zeta)(0, 0).real();
  return q < 0 && std::abs(q - c.value) <= abs_tol * std::max(1.0, std::abs(c.value));
}

/// Re-check J = A + B^Gamma with A, B PSD.
inline bool verify_decomposition(const SuperOperator& t, const Certificate& c, const ToleranceConfig& tol = {}) {
  if (c.kind != CertificateKind::decomposition_pair || c.matrices.size() != 2) return false;
  const ComplexMatrix& a = c.matrices[0];
  const ComplexMatrix& b = c.matrices[1];
  if (a.rows() != t.choi().rows() || b.rows() != t.choi().rows()) return false;
  if (!is_psd(a, tol).holds || !is_psd(b, tol).holds) return false;
  const double residual = frobenius_norm(a + partial_transpose_first(b, t.dim_in(), t.dim_out()) - t.choi());
  return residual <= tol.tol_cert * std::max(1.0, frobenius_norm(t.choi()));
}

/// Re-check a PPT witness: rho, rho^Gamma PSD, tr rho = 1, tr(rho J) = value < -tol_cert.
inline bool verify_ppt_witness(const SuperOperator& t, const Certificate& c, const ToleranceConfig& tol = {}) {
  if (c.kind != CertificateKind::ppt_witness || c.matrices.empty()) return false;
  const ComplexMatrix& rho = c.matrices.front();
  if (rho.rows() != t.choi().rows()) return false;
  if (!is_psd(rho, tol).holds) return false;
  if (!is_psd(partial_transpose_first(rho, t.dim_in(), t.dim_out()), tol).holds) return false;
  if (std::abs(rho.trace() - Complex(1.0)) > tol.tol_cert) return false;
  const double value = (rho * t.choi()).trace().real();
  return value < -tol.tol_cert && std::abs(value - c.value) <= 1e-10;
}

namespace detail {

inline ComplexMatrix project_psd(const ComplexMatrix& m, const ToleranceConfig& tol) {
  const auto dec = eig_hermitian(hermitian_part(m), tol);
  return dec.apply([](double x) { return x > 0 ? x : 0.0; });
}

struct PptProjector {
  Eigen::Index d1, d2;
  const ToleranceConfig& tol;
  int sweeps;

  ComplexMatrix gamma(const ComplexMatrix& m) const { return partial_transpose_first(m, d1, d2); }

  /// Dykstra projection onto {rho PSD, rho^Gamma PSD, tr rho = 1}.
  ComplexMatrix operator()(const ComplexMatrix& start) const {
    const Eigen::Index d = d1 * d2;
    ComplexMatrix x = start;
    ComplexMatrix p = ComplexMatrix::Zero(d, d), q = ComplexMatrix::Zero(d, d);
    for (int it = 0; it < sweeps; ++it) {
      const ComplexMatrix prev = x;
      ComplexMatrix y = project_psd(x + p, tol);
      p = x + p - y;
      ComplexMatrix z = gamma(project_psd(gamma(y + q), tol));
      q = y + q - z;
      x = z;
      x.diagonal().array() += (1.0 - x.trace()) / static_cast<double>(d);
      if ((x - prev).norm() < 1e-13) break;
    }
    return hermitian_part(x);
  }
};

/// Mixes rho with the maximally mixed state just enough to make rho and rho^Gamma PSD.
inline ComplexMatrix polish_state(ComplexMatrix rho, Eigen::Index d1, Eigen::Index d2, const ToleranceConfig& tol) {
  const Eigen::Index d = d1 * d2;
  rho = hermitian_part(rho);
  rho /= rho.trace().real();
  const double lmin = std::min(eig_hermitian(rho, tol).min(), eig_hermitian(partial_transpose_first(rho, d1, d2), tol).min());
  if (lmin < 0) {
    const double uniform_weight = 1.0 / static_cast<double>(d);
    const double s = std::min(1.0, -lmin / (uniform_weight - lmin) * (1.0 + 1e-9) + 1e-15);
    rho = (1 - s) * rho + s * uniform_weight * ComplexMatrix::Identity(d, d);
  }
  return rho;
}

}  // namespace detail

/// Decides whether J(T) = A + B^Gamma with A, B PSD.
///
/// Exact rules first (CP, completely copositive). Then Dykstra's alternating
/// projections between the product PSD cone and the affine set
/// {A + B^Gamma = J}. If the residual plateaus, search for a PPT state rho
/// with tr(rho J) < 0 by projected descent; such a rho separates J from the
/// decomposable cone.
inline MapVerdict check_decomposable(const SuperOperator& t, const ToleranceConfig& tol = {},
                                     const DykstraOptions& opt = {}) {
  detail::require_hermiticity_preserving(t);
  const Eigen::Index d1 = t.dim_in(), d2 = t.dim_out(), d = d1 * d2;
  const ComplexMatrix& j = t.choi();
  const double jnorm = std::max(1.0, frobenius_norm(j));
  auto gamma = [&](const ComplexMatrix& m) { return partial_transpose_first(m, d1, d2); };

  auto pair_certificate = [](ComplexMatrix a, ComplexMatrix b, std::string note, std::int64_t budget) {
    Certificate c;
    c.kind = CertificateKind::decomposition_pair;
    c.matrices = {std::move(a), std::move(b)};
    c.note = std::move(note);
    c.budget = budget;
    return c;
  };

  MapVerdict v;
  if (is_psd(j, tol).holds) {
    v.status = Status::certified;
    v.rule = "completely positive: A = J, B = 0";
    v.certificate = pair_certificate(j, ComplexMatrix::Zero(d, d), v.rule, 0);
    return v;
  }
  if (is_psd(gamma(j), tol).holds) {
    v.status = Status::certified;
    v.rule = "completely copositive: A = 0, B = J^Gamma";
    v.certificate = pair_certificate(ComplexMatrix::Zero(d, d), gamma(j), v.rule, 0);
    return v;
  }

  // Phase 1: Dykstra feasibility
  ComplexMatrix a = hermitian_part(j), b = ComplexMatrix::Zero(d, d);
  ComplexMatrix pa = ComplexMatrix::Zero(d, d), pb = ComplexMatrix::Zero(d, d);
  std::vector<double> history;
  double best_residual = std::numeric_limits<double>::infinity();
  std::int64_t iterations = 0;
  for (int it = 0; it < tol.max_iters; ++it) {
    ++iterations;
    const ComplexMatrix ya = detail::project_psd(a + pa, tol);
    const ComplexMatrix yb = detail::project_psd(b + pb, tol);
    pa = a + pa - ya;
    pb = b + pb - yb;
    const ComplexMatrix delta = 0.5 * (ya + gamma(yb) - j);
    const double residual = frobenius_norm(2.0 * delta) / jnorm;
    best_residual = std::min(best_residual, residual);
    if (residual < tol.tol_cert) {
      Certificate c = pair_certificate(ya, yb, "Dykstra alternating projections", iterations);
      if (verify_decomposition(t, c, tol)) {
        v.status = Status::certified;
        v.rule = "decomposition found by alternating projections";
        v.value = residual;
        v.certificate = std::move(c);
        return v;
      }
    }
    a = ya - delta;
    b = yb - gamma(delta);
    history.push_back(residual);
    if (history.size() > static_cast<std::size_t>(opt.plateau_window)) {
      const double earlier = history[history.size() - 1 - static_cast<std::size_t>(opt.plateau_window)];
      if (earlier - residual < opt.plateau_improvement) break;
    }
  }

  // Phase 2: PPT witness by projected descent on tr(rho J)
  const detail::PptProjector project{d1, d2, tol, opt.projection_sweeps};
  const double step = 0.5 / std::max(1e-300, operator_norm(j, tol));
  ComplexMatrix rho = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  ComplexMatrix best_rho = rho;
  double best_value = (rho * j).trace().real();
  std::int64_t steps = 0;
  for (int it = 0; it < opt.witness_steps; ++it) {
    ++steps;
    const ComplexMatrix next = project(rho - step * j);
    const double moved = (next - rho).norm();
    rho = next;
    const ComplexMatrix candidate = detail::polish_state(rho, d1, d2, tol);
    const double value = (candidate * j).trace().real();
    if (value < best_value) best_value = value, best_rho = candidate;
    if (moved < 1e-12) break;
  }

  if (best_value < -tol.tol_cert) {
    Certificate c;
    c.kind = CertificateKind::ppt_witness;
    c.matrices = {best_rho};
    c.value = best_value;
    c.budget = iterations + steps;
    c.note = "projected descent over PPT states";
    if (verify_ppt_witness(t, c, tol)) {
      v.status = Status::violated;
      v.rule = "PPT state with negative pairing";
      v.value = best_value;
      v.certificate = std::move(c);
      return v;
    }
  }
  v.status = Status::inconclusive;
  v.rule = "no decomposition and no PPT witness within budget";
  v.value = best_residual;
  v.certificate.kind = CertificateKind::inconclusive;
  v.certificate.value = best_value;
  v.certificate.budget = iterations + steps;
  return v;
}

enum class Order { positive, complete };

inline std::string to_string(Order o) { return o == Order::complete ? "complete" : "positive"; }

struct DominationVerdict {
  Status status = Status::inconclusive;
  Order order = Order::positive;
  MapVerdict lower;  // T >= 0
  MapVerdict gap;    // S - T >= 0 (order positive) or S - T CP (order complete)

  bool holds() const { return status == Status::certified || status == Status::heuristic; }
};

/// 0 <= T <= S (order positive) or 0 <= T <=_c S (order complete).
inline DominationVerdict dominates(const SuperOperator& s, const SuperOperator& t, Order order,
                                   const ToleranceConfig& tol = {}) {
  if (s.dim_in() != t.dim_in() || s.dim_out() != t.dim_out())
    throw Error(ErrorCode::DimensionMismatch, "S and T have different shapes");
  detail::require_hermiticity_preserving(s);
  detail::require_hermiticity_preserving(t);
  DominationVerdict out;
  out.order = order;
  out.lower = check_positive(t, tol);
  const SuperOperator difference = s - t;
  out.gap = order == Order::complete ? check_cp(difference, tol) : check_positive(difference, tol);
  auto rank = [](Status st) {
    switch (st) {
      case Status::violated: return 3;
      case Status::inconclusive: return 2;
      case Status::heuristic: return 1;
      case Status::certified: return 0;
    }
    return 2;
  };
  out.status = rank(out.lower.status) >= rank(out.gap.status) ? out.lower.status : out.gap.status;
  return out;
}

}  // namespace domcheck
