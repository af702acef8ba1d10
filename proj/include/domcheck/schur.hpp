#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "domcheck/certificate.hpp"
#include "domcheck/random.hpp"
#include "domcheck/spectral.hpp"

namespace domcheck {

/// Finite grid phi_ij of a Schur multiplier x |-> (phi_ij x_ij).
struct SchurSymbol {
  ComplexMatrix entries;
  std::string tail_model;  // free-form decay description, reported only

  SchurSymbol() = default;
  explicit SchurSymbol(ComplexMatrix e, std::string tail = {}) : entries(std::move(e)), tail_model(std::move(tail)) {
    require_square(entries, "Schur symbol");
    if (!entries.allFinite()) throw Error(ErrorCode::BadRange, "Schur symbol has non-finite entries");
  }

  Eigen::Index size() const { return entries.rows(); }
};

inline ComplexMatrix schur_apply(const SchurSymbol& phi, const ComplexMatrix& x) {
  if (x.rows() != phi.size() || x.cols() != phi.size())
    throw Error(ErrorCode::DimensionMismatch, "symbol and argument sizes differ");
  return phi.entries.cwiseProduct(x);
}

/// A finite symbol is formally positive iff the grid itself is PSD.
inline bool formally_positive(const SchurSymbol& phi, const ToleranceConfig& tol = {}) {
  if (phi.size() == 0) return true;
  if (!is_hermitian(phi.entries, tol.tol_herm)) return false;
  return is_psd(phi.entries, tol).holds;
}

struct TailReport {
  Eigen::Index threshold = 0;
  RealVector row_tail;     // sup_{j > J, j != i} |phi_ij|
  RealVector column_tail;  // sup_{j > J, j != i} |phi_ji|
  double score = 0.0;
};

/// Finite diagnostic for rows and columns of the symbol vanishing at infinity.
/// Not a decision procedure: a finite grid says nothing about the limit.
inline TailReport dp_tail_score(const SchurSymbol& phi, Eigen::Index threshold) {
  const Eigen::Index n = phi.size();
  if (threshold < 0 || threshold >= n)
    throw Error(ErrorCode::BadThreshold, "threshold " + std::to_string(threshold) + " outside [0, " +
                                             std::to_string(n) + ")");
  TailReport r;
  r.threshold = threshold;
  r.row_tail = RealVector::Zero(n);
  r.column_tail = RealVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = threshold + 1; j < n; ++j) {
      if (j == i) continue;
      r.row_tail(i) = std::max(r.row_tail(i), std::abs(phi.entries(i, j)));
      r.column_tail(i) = std::max(r.column_tail(i), std::abs(phi.entries(j, i)));
    }
  r.score = std::max(r.row_tail.maxCoeff(), r.column_tail.maxCoeff());
  return r;
}

/// Off-diagonal bound on D: |D_ij| < 10^{-2(i+j)}.
inline double obstruction_offdiag_bound(Eigen::Index i, Eigen::Index j) {
  return std::pow(10.0, -2.0 * static_cast<double>(i + j));
}

/// Two PSD (m+1)x(m+1) grids that cannot satisfy C <= D.
struct ObstructionInstance {
  ComplexMatrix C, D;
  double c = 0.0;
  int m = 0;
  ComplexVector omega;  // omega_i = C_i0 / |C_i0|, i = 1..m (omega_0 unused, set to 1)
  double alpha = 0.0;   // m c

  double bound() const { return alpha * alpha + m + 1 - 2 * alpha * m * c; }
};

/// Lists every violated instance condition; empty means valid.
/// Heavy entries are required to satisfy |C_0j| >= c: with c = 1 the strict
/// form would contradict the unit bound on entries, and the witness estimate
/// only needs the weak form.
inline std::vector<std::string> validate(const ObstructionInstance& inst, const ToleranceConfig& tol = {}) {
  std::vector<std::string> bad;
  const Eigen::Index n = inst.m + 1;
  if (inst.m < 1) bad.push_back("m must be at least 1");
  if (!(inst.c > 0)) bad.push_back("c must be positive");
  const double mc = inst.m * inst.c;
  if (!(mc * mc > inst.m + 1)) bad.push_back("(mc)^2 <= m+1");
  if (inst.C.rows() != n || inst.C.cols() != n || inst.D.rows() != n || inst.D.cols() != n) {
    bad.push_back("C and D must be (m+1)x(m+1)");
    return bad;
  }
  if (!is_hermitian(inst.C, tol.tol_herm) || !is_psd(inst.C, tol).holds) bad.push_back("C is not PSD");
  if (!is_hermitian(inst.D, tol.tol_herm) || !is_psd(inst.D, tol).holds) bad.push_back("D is not PSD");
  if (std::max(inst.C.cwiseAbs().maxCoeff(), inst.D.cwiseAbs().maxCoeff()) > 1.0 + tol.tol_cert)
    bad.push_back("an entry exceeds 1 in modulus");
  for (Eigen::Index j = 1; j < n; ++j)
    if (std::abs(inst.C(0, j)) < inst.c * (1 - 1e-12)) bad.push_back("|C_0" + std::to_string(j) + "| < c");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && !(std::abs(inst.D(i, j)) < obstruction_offdiag_bound(i, j)))
        bad.push_back("|D_" + std::to_string(i) + std::to_string(j) + "| too large");
  if (std::abs(inst.alpha - mc) > 1e-12 * std::max(1.0, mc)) bad.push_back("alpha != m c");
  if (inst.omega.size() != n) {
    bad.push_back("omega has wrong length");
  } else {
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(inst.C(i, 0)) > 0 && std::abs(inst.omega(i) - inst.C(i, 0) / std::abs(inst.C(i, 0))) > 1e-12)
        bad.push_back("omega_" + std::to_string(i) + " != C_i0/|C_i0|");
  }
  return bad;
}

/// Fills omega and alpha from C, c and m.
inline ObstructionInstance make_instance(ComplexMatrix C, ComplexMatrix D, double c, int m) {
  ObstructionInstance inst;
  inst.C = std::move(C);
  inst.D = std::move(D);
  inst.c = c;
  inst.m = m;
  inst.alpha = m * c;
  inst.omega = ComplexVector::Ones(m + 1);
  for (Eigen::Index i = 1; i <= m && i < inst.C.rows(); ++i) {
    const double r = std::abs(inst.C(i, 0));
    inst.omega(i) = r > 0 ? Complex(inst.C(i, 0) / r) : Complex(1.0);
  }
  return inst;
}

/// Rank-one C = v v* with v_0 = 1, |v_j| in (c, 1]; D = 1 + small Hermitian noise.
inline ObstructionInstance build_obstruction(double c, int m, std::uint64_t seed, const ToleranceConfig& tol = {}) {
  if (m < 1 || !(c > 0) || c > 1)
    throw Error(ErrorCode::InfeasibleParameters, "need m >= 1 and 0 < c <= 1");
  if (!((m * c) * (m * c) > m + 1))
    throw Error(ErrorCode::InfeasibleParameters, "(mc)^2 = " + std::to_string((m * c) * (m * c)) +
                                                     " <= m+1 = " + std::to_string(m + 1));
  Rng rng(seed);
  const Eigen::Index n = m + 1;
  ComplexVector v(n);
  v(0) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    const double radius = c + (1.0 - c) * (1.0 - uniform(rng));  // in (c, 1]
    v(j) = std::polar(radius, uniform(rng, 0.0, 2.0 * M_PI));
  }
  ComplexMatrix D = ComplexMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // half the allowed size keeps D diagonally dominant, hence PSD
      const Complex z = std::polar(0.5 * uniform(rng) * obstruction_offdiag_bound(i, j), uniform(rng, 0.0, 2.0 * M_PI));
      D(i, j) = z;
      D(j, i) = std::conj(z);
    }
  auto inst = make_instance(v * v.adjoint(), std::move(D), c, m);
  const auto bad = validate(inst, tol);
  if (!bad.empty()) throw Error(ErrorCode::InfeasibleParameters, "constructed instance invalid: " + bad.front());
  return inst;
}

struct ObstructionWitness {
  double q = 0.0;                // <[[D,C],[C,D]] xi, xi>
  double bound = 0.0;            // alpha^2 + m + 1 - 2 alpha m c
  double min_eig_d_minus_c = 0.0;
  Certificate certificate;       // vectors: xi, then the eigenvector of D - C
};

inline ComplexMatrix obstruction_block(const ObstructionInstance& inst) {
  const Eigen::Index n = inst.C.rows();
  ComplexMatrix block(2 * n, 2 * n);
  block << inst.D, inst.C, inst.C, inst.D;
  return block;
}

/// Evaluates the quadratic form at xi = (alpha e_0, -sum omega_i e_i) and
/// checks directly that D - C has a negative eigenvalue.
inline ObstructionWitness obstruction_witness(const ObstructionInstance& inst, const ToleranceConfig& tol = {}) {
  const Eigen::Index n = inst.C.rows();
  ComplexVector xi = ComplexVector::Zero(2 * n);
  xi(0) = inst.alpha;
  for (Eigen::Index i = 1; i < n; ++i) xi(n + i) = -inst.omega(i);

  ObstructionWitness w;
  w.q = (xi.adjoint() * obstruction_block(inst) * xi)(0, 0).real();
  w.bound = inst.bound();
  if (!(w.q < -tol.tol_cert))
    throw Error(ErrorCode::WitnessFailed, "quadratic form " + std::to_string(w.q) + " is not negative");
  if (w.q > w.bound + tol.tol_cert)
    throw Error(ErrorCode::WitnessFailed, "quadratic form " + std::to_string(w.q) + " exceeds the bound " +
                                              std::to_string(w.bound));
  const auto gap = is_psd(hermitian_part(inst.D - inst.C), tol);
  w.min_eig_d_minus_c = gap.min_eigenvalue;
  if (gap.holds) throw Error(ErrorCode::WitnessFailed, "D - C is PSD");

  w.certificate.kind = CertificateKind::psd_witness;
  w.certificate.vectors = {xi, gap.certificate.vectors.front()};
  w.certificate.value = w.q;
  w.certificate.note = "C <= D fails";
  return w;
}

struct ObstructionSearch {
  bool preconditions_hold = true;
  std::vector<std::string> precondition_failures;
  bool found = false;
  bool exhaustive = true;
  std::int64_t subsets_examined = 0;
  std::vector<Eigen::Index> indices;  // n_0 < n_1 < ... < n_m
  std::optional<ObstructionInstance> instance;
  std::optional<ObstructionWitness> witness;
  std::string message;
};

inline constexpr Eigen::Index kExhaustiveSearchLimit = 12;

namespace detail {

inline ComplexMatrix extract(const ComplexMatrix& grid, const std::vector<Eigen::Index>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  ComplexMatrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = grid(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

/// Entry conditions on the index set, checked before any eigenvalue work.
inline bool entry_conditions(const SchurSymbol& phi, const SchurSymbol& psi, const std::vector<Eigen::Index>& idx,
                             double c, const ToleranceConfig& tol) {
  const auto k = idx.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      const Complex p = phi.entries(idx[a], idx[b]);
      const Complex s = psi.entries(idx[a], idx[b]);
      if (std::abs(p) > 1.0 + tol.tol_cert || std::abs(s) > 1.0 + tol.tol_cert) return false;
      if (a != b && !(std::abs(s) < obstruction_offdiag_bound(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))))
        return false;
      if (a == 0 && b > 0 && std::abs(p) < c * (1 - 1e-12)) return false;
    }
  return true;
}

}  // namespace detail

/// Looks for n_0 < ... < n_m turning (phi, psi) into an obstruction instance.
/// Exhaustive for N <= 12; beyond that, each n_0 is extended greedily in index order.
inline ObstructionSearch finite_domination_obstruction(const SchurSymbol& phi, const SchurSymbol& psi, double c, int m,
                                                       const ToleranceConfig& tol = {}) {
  ObstructionSearch out;
  if (phi.size() != psi.size()) {
    out.preconditions_hold = false;
    out.precondition_failures.push_back("symbols have different sizes");
    out.message = "precondition violated";
    return out;
  }
  if (!formally_positive(phi, tol)) out.precondition_failures.push_back("phi is not formally positive");
  if (!formally_positive(psi, tol)) out.precondition_failures.push_back("psi is not formally positive");
  if (!formally_positive(SchurSymbol(psi.entries - phi.entries), tol))
    out.precondition_failures.push_back("psi - phi is not formally positive");
  out.preconditions_hold = out.precondition_failures.empty();

  const Eigen::Index n = phi.size();
  const auto k = static_cast<std::size_t>(m + 1);
  auto try_indices = [&](const std::vector<Eigen::Index>& idx) {
    ++out.subsets_examined;
    if (!detail::entry_conditions(phi, psi, idx, c, tol)) return false;
    auto inst = make_instance(detail::extract(phi.entries, idx), detail::extract(psi.entries, idx), c, m);
    if (!validate(inst, tol).empty()) return false;
    out.found = true;
    out.indices = idx;
    out.witness = obstruction_witness(inst, tol);
    out.instance = std::move(inst);
    return true;
  };

  if (m >= 1 && c > 0 && (m * c) * (m * c) > m + 1 && static_cast<Eigen::Index>(k) <= n) {
    if (n <= kExhaustiveSearchLimit) {
      std::vector<bool> mask(static_cast<std::size_t>(n), false);
      std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
        if (try_indices(idx)) break;
      } while (std::prev_permutation(mask.begin(), mask.end()));
    } else {
      out.exhaustive = false;
      for (Eigen::Index n0 = 0; n0 < n && !out.found; ++n0) {
        std::vector<Eigen::Index> idx{n0};
        for (Eigen::Index j = n0 + 1; j < n && idx.size() < k; ++j) {
          idx.push_back(j);
          if (!detail::entry_conditions(phi, psi, idx, c, tol)) idx.pop_back();
        }
        if (idx.size() == k) try_indices(idx);
      }
    }
  }

  if (out.found)
    out.message = "configuration impossible: the extracted grids satisfy the obstruction conditions, so C <= D fails";
  else
    out.message = "no obstruction found at this scale";
  if (!out.preconditions_hold) out.message += " (preconditions violated: " + out.precondition_failures.front() + ")";
  return out;
}

}  // namespace domcheck
