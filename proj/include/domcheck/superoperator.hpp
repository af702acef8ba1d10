#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "domcheck/config.hpp"
#include "domcheck/spectral.hpp"

namespace domcheck {

/// Named constructions with exact defining formulas.
enum class BuiltinKind {
  identity,              // a
  transpose,             // a^t
  trace_times_identity,  // tr(a) 1
  conjugation,           // u a u*
  multiplication,        // x* a x
  stormer_U,             // diagonal kept, off-diagonal negated (M_3)
  stormer_V,             // diag(a_33, a_11, a_22) (M_3)
  stormer_W,             // diag(a_11, a_22, a_33) (M_3)
  symmetrization,        // (a + a^t) / 2
  schur,                 // entrywise product with a symbol
};

inline std::string builtin_name(BuiltinKind k) {
  switch (k) {
    case BuiltinKind::identity: return "identity";
    case BuiltinKind::transpose: return "transpose";
    case BuiltinKind::trace_times_identity: return "trace_times_identity";
    case BuiltinKind::conjugation: return "conjugation";
    case BuiltinKind::multiplication: return "multiplication";
    case BuiltinKind::stormer_U: return "stormer_U";
    case BuiltinKind::stormer_V: return "stormer_V";
    case BuiltinKind::stormer_W: return "stormer_W";
    case BuiltinKind::symmetrization: return "symmetrization";
    case BuiltinKind::schur: return "schur";
  }
  return "unknown";
}

struct Builtin {
  BuiltinKind kind;
  ComplexMatrix parameter;  // u, x or the Schur symbol; empty otherwise
};

/// A linear map M_{dim_in} -> M_{dim_out}.
///
/// The Choi matrix J = sum_ij E_ij (x) T(E_ij) is always materialized;
/// block (i, j) of J (size dim_out) is T(E_ij). Kraus operators, when
/// present, act as T(a) = sum_k K a K* with K of size dim_out x dim_in.
class SuperOperator {
 public:
  SuperOperator() = default;

  static SuperOperator from_choi(ComplexMatrix choi, Eigen::Index dim_in, Eigen::Index dim_out,
                                 const ToleranceConfig& tol = {}) {
    if (dim_in < 1 || dim_out < 1 || choi.rows() != dim_in * dim_out || choi.cols() != dim_in * dim_out)
      throw Error(ErrorCode::DimensionMismatch, "Choi matrix size must be (dim_in*dim_out)^2");
    SuperOperator t;
    t.dim_in_ = dim_in;
    t.dim_out_ = dim_out;
    t.choi_ = std::move(choi);
    t.hermiticity_preserving_ = is_hermitian(t.choi_, tol.tol_herm);
    return t;
  }

  static SuperOperator from_kraus(std::vector<ComplexMatrix> kraus, const ToleranceConfig& tol = {}) {
    if (kraus.empty()) throw Error(ErrorCode::DimensionMismatch, "empty Kraus list");
    const Eigen::Index dout = kraus.front().rows(), din = kraus.front().cols();
    for (const auto& k : kraus)
      if (k.rows() != dout || k.cols() != din) throw Error(ErrorCode::DimensionMismatch, "Kraus shapes differ");
    ComplexMatrix choi = ComplexMatrix::Zero(din * dout, din * dout);
    for (const auto& k : kraus) {
      // column vector sum_i e_i (x) K e_i
      ComplexVector v(din * dout);
      for (Eigen::Index i = 0; i < din; ++i) v.segment(i * dout, dout) = k.col(i);
      choi += v * v.adjoint();
    }
    auto t = from_choi(std::move(choi), din, dout, tol);
    t.kraus_ = std::move(kraus);
    return t;
  }

  /// Tabulates an arbitrary linear function on matrix units.
  static SuperOperator from_function(Eigen::Index dim_in, Eigen::Index dim_out,
                                     const std::function<ComplexMatrix(const ComplexMatrix&)>& f,
                                     const ToleranceConfig& tol = {}) {
    ComplexMatrix choi(dim_in * dim_out, dim_in * dim_out);
    for (Eigen::Index i = 0; i < dim_in; ++i)
      for (Eigen::Index j = 0; j < dim_in; ++j) {
        const ComplexMatrix image = f(matrix_unit(dim_in, i, j));
        if (image.rows() != dim_out || image.cols() != dim_out)
          throw Error(ErrorCode::DimensionMismatch, "function output has wrong size");
        choi.block(i * dim_out, j * dim_out, dim_out, dim_out) = image;
      }
    return from_choi(std::move(choi), dim_in, dim_out, tol);
  }

  static SuperOperator builtin(BuiltinKind kind, Eigen::Index n, ComplexMatrix parameter = {}) {
    Builtin b{kind, std::move(parameter)};
    Eigen::Index din = n, dout = n;
    switch (kind) {
      case BuiltinKind::stormer_U:
      case BuiltinKind::stormer_V:
      case BuiltinKind::stormer_W:
        din = dout = 3;
        break;
      case BuiltinKind::conjugation:
      case BuiltinKind::multiplication:
        require_square(b.parameter, "conjugation parameter");
        din = dout = b.parameter.rows();
        break;
      case BuiltinKind::schur:
        require_square(b.parameter, "Schur symbol");
        din = dout = b.parameter.rows();
        break;
      default:
        break;
    }
    if (din < 1) throw Error(ErrorCode::DimensionMismatch, "builtin dimension must be positive");
    SuperOperator t = from_function(din, dout, [&](const ComplexMatrix& a) { return apply_builtin(b, a); });
    t.builtin_ = std::move(b);
    t.kraus_ = builtin_kraus(*t.builtin_, din);
    return t;
  }

  static SuperOperator identity(Eigen::Index n) { return builtin(BuiltinKind::identity, n); }
  static SuperOperator transpose(Eigen::Index n) { return builtin(BuiltinKind::transpose, n); }
  static SuperOperator trace_times_identity(Eigen::Index n) { return builtin(BuiltinKind::trace_times_identity, n); }
  static SuperOperator conjugation(const ComplexMatrix& u) { return builtin(BuiltinKind::conjugation, 0, u); }
  static SuperOperator stormer_U() { return builtin(BuiltinKind::stormer_U, 3); }
  static SuperOperator stormer_V() { return builtin(BuiltinKind::stormer_V, 3); }
  static SuperOperator stormer_W() { return builtin(BuiltinKind::stormer_W, 3); }
  static SuperOperator symmetrization(Eigen::Index n) { return builtin(BuiltinKind::symmetrization, n); }
  static SuperOperator schur(const ComplexMatrix& symbol) { return builtin(BuiltinKind::schur, 0, symbol); }

  Eigen::Index dim_in() const { return dim_in_; }
  Eigen::Index dim_out() const { return dim_out_; }
  const ComplexMatrix& choi() const { return choi_; }
  const std::optional<std::vector<ComplexMatrix>>& kraus() const { return kraus_; }
  const std::optional<Builtin>& builtin_spec() const { return builtin_; }
  bool hermiticity_preserving() const { return hermiticity_preserving_; }

  /// J(T)(i, j) block, i.e. T(E_ij).
  ComplexMatrix image_of_unit(Eigen::Index i, Eigen::Index j) const {
    return choi_.block(i * dim_out_, j * dim_out_, dim_out_, dim_out_);
  }

  ComplexMatrix apply(const ComplexMatrix& a) const {
    if (a.rows() != dim_in_ || a.cols() != dim_in_)
      throw Error(ErrorCode::DimensionMismatch, "input is " + std::to_string(a.rows()) + "x" +
                                                    std::to_string(a.cols()) + ", map expects " +
                                                    std::to_string(dim_in_));
    if (builtin_) return apply_builtin(*builtin_, a);
    if (kraus_) {
      ComplexMatrix out = ComplexMatrix::Zero(dim_out_, dim_out_);
      for (const auto& k : *kraus_) out += k * a * k.adjoint();
      return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_out_, dim_out_);
    for (Eigen::Index i = 0; i < dim_in_; ++i)
      for (Eigen::Index j = 0; j < dim_in_; ++j)
        if (a(i, j) != Complex(0.0)) out += a(i, j) * image_of_unit(i, j);
    return out;
  }

  ComplexMatrix operator()(const ComplexMatrix& a) const { return apply(a); }

  /// (I_k (x) T) applied to an element of M_k(M_{dim_in}) laid out as k x k blocks.
  ComplexMatrix apply_ampliated(const ComplexMatrix& x, Eigen::Index k) const {
    if (x.rows() != k * dim_in_ || x.cols() != k * dim_in_)
      throw Error(ErrorCode::DimensionMismatch, "ampliated input has wrong size");
    ComplexMatrix out(k * dim_out_, k * dim_out_);
    for (Eigen::Index p = 0; p < k; ++p)
      for (Eigen::Index q = 0; q < k; ++q)
        out.block(p * dim_out_, q * dim_out_, dim_out_, dim_out_) =
            apply(x.block(p * dim_in_, q * dim_in_, dim_in_, dim_in_));
    return out;
  }

  friend SuperOperator operator+(const SuperOperator& s, const SuperOperator& t) { return combine(s, t, 1.0, 1.0); }
  friend SuperOperator operator-(const SuperOperator& s, const SuperOperator& t) { return combine(s, t, 1.0, -1.0); }
  friend SuperOperator operator*(double c, const SuperOperator& t) {
    return from_choi(c * t.choi_, t.dim_in_, t.dim_out_);
  }

  /// (outer o inner)(a) = outer(inner(a)).
  friend SuperOperator compose(const SuperOperator& outer, const SuperOperator& inner) {
    if (outer.dim_in_ != inner.dim_out_) throw Error(ErrorCode::DimensionMismatch, "composition dimensions");
    return from_function(inner.dim_in_, outer.dim_out_,
                         [&](const ComplexMatrix& a) { return outer.apply(inner.apply(a)); });
  }

 private:
  static SuperOperator combine(const SuperOperator& s, const SuperOperator& t, double cs, double ct) {
    if (s.dim_in_ != t.dim_in_ || s.dim_out_ != t.dim_out_)
      throw Error(ErrorCode::DimensionMismatch, "maps have different shapes");
    return from_choi(cs * s.choi_ + ct * t.choi_, s.dim_in_, s.dim_out_);
  }

  static ComplexMatrix apply_builtin(const Builtin& b, const ComplexMatrix& a) {
    const Eigen::Index n = a.rows();
    switch (b.kind) {
      case BuiltinKind::identity:
        return a;
      case BuiltinKind::transpose:
        return a.transpose();
      case BuiltinKind::trace_times_identity:
        return a.trace() * ComplexMatrix::Identity(n, n);
      case BuiltinKind::conjugation:
        return b.parameter * a * b.parameter.adjoint();
      case BuiltinKind::multiplication:
        return b.parameter.adjoint() * a * b.parameter;
      case BuiltinKind::stormer_U: {
        ComplexMatrix out = -a;
        out.diagonal() = a.diagonal();
        return out;
      }
      case BuiltinKind::stormer_V:
        return diag({a(2, 2), a(0, 0), a(1, 1)});
      case BuiltinKind::stormer_W:
        return diag({a(0, 0), a(1, 1), a(2, 2)});
      case BuiltinKind::symmetrization:
        return 0.5 * (a + a.transpose());
      case BuiltinKind::schur:
        return b.parameter.cwiseProduct(a);
    }
    return a;
  }

  static std::optional<std::vector<ComplexMatrix>> builtin_kraus(const Builtin& b, Eigen::Index n) {
    switch (b.kind) {
      case BuiltinKind::identity:
        return std::vector<ComplexMatrix>{ComplexMatrix::Identity(n, n)};
      case BuiltinKind::conjugation:
        return std::vector<ComplexMatrix>{b.parameter};
      case BuiltinKind::multiplication:
        return std::vector<ComplexMatrix>{b.parameter.adjoint()};
      case BuiltinKind::trace_times_identity: {
        std::vector<ComplexMatrix> ks;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) ks.push_back(matrix_unit(n, i, j));
        return ks;
      }
      case BuiltinKind::stormer_V:
        return std::vector<ComplexMatrix>{matrix_unit(3, 0, 2), matrix_unit(3, 1, 0), matrix_unit(3, 2, 1)};
      case BuiltinKind::stormer_W:
        return std::vector<ComplexMatrix>{matrix_unit(3, 0, 0), matrix_unit(3, 1, 1), matrix_unit(3, 2, 2)};
      default:
        return std::nullopt;
    }
  }

  Eigen::Index dim_in_ = 0;
  Eigen::Index dim_out_ = 0;
  ComplexMatrix choi_;
  std::optional<std::vector<ComplexMatrix>> kraus_;
  std::optional<Builtin> builtin_;
  bool hermiticity_preserving_ = false;
};

/// Largest |T(E_ij) - S(E_ij)| entry over all matrix units.
inline double max_unit_discrepancy(const SuperOperator& s, const SuperOperator& t) {
  if (s.dim_in() != t.dim_in() || s.dim_out() != t.dim_out())
    throw Error(ErrorCode::DimensionMismatch, "maps have different shapes");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.dim_in(); ++i)
    for (Eigen::Index j = 0; j < s.dim_in(); ++j) {
      const ComplexMatrix e = matrix_unit(s.dim_in(), i, j);
      worst = std::max(worst, (s.apply(e) - t.apply(e)).cwiseAbs().maxCoeff());
    }
  return worst;
}

/// Kraus operators from the eigendecomposition of a PSD Choi matrix; one per
/// eigenvalue above kRankCut * lambda_max.
inline std::vector<ComplexMatrix> kraus_from_choi(const SuperOperator& t, const ToleranceConfig& tol = {}) {
  const auto dec = eig_hermitian(t.choi(), tol);
  if (dec.min() < psd_threshold(dec.max_abs(), tol))
    throw Error(ErrorCode::NotCP, "Choi matrix has eigenvalue " + std::to_string(dec.min()));
  const double cut = kRankCut * std::max(0.0, dec.eigenvalues.size() ? dec.eigenvalues(0) : 0.0);
  std::vector<ComplexMatrix> out;
  for (Eigen::Index r = 0; r < dec.eigenvalues.size(); ++r) {
    const double lambda = dec.eigenvalues(r);
    if (!(lambda > cut) || lambda <= 0) continue;
    ComplexMatrix k(t.dim_out(), t.dim_in());
    for (Eigen::Index i = 0; i < t.dim_in(); ++i)
      k.col(i) = std::sqrt(lambda) * dec.eigenvectors.col(r).segment(i * t.dim_out(), t.dim_out());
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace domcheck
