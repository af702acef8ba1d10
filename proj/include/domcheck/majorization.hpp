#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "domcheck/config.hpp"
#include "domcheck/spectral.hpp"

namespace domcheck {

/// Singular values mu(0) >= mu(1) >= ... >= 0 of a matrix; the step
/// function t -> mu(floor(t)) is the generalized singular value function.
class SingularSpectrum {
 public:
  SingularSpectrum() = default;

  /// Sorts non-increasing and clips entries in [-tol_psd, 0) to zero.
  explicit SingularSpectrum(RealVector values, const ToleranceConfig& tol = {}) : values_(std::move(values)) {
    std::sort(values_.data(), values_.data() + values_.size(), std::greater<>());
    const double floor = -tol.tol_psd * std::max(1.0, values_.size() ? std::abs(values_(0)) : 0.0);
    for (auto& v : values_) {
      if (v < floor) throw Error(ErrorCode::BadRange, "spectrum entry " + std::to_string(v) + " is negative");
      v = std::max(v, 0.0);
    }
  }

  const RealVector& values() const { return values_; }
  Eigen::Index ambient_dim() const { return values_.size(); }
  double operator[](Eigen::Index k) const { return k < values_.size() ? values_(k) : 0.0; }

  SingularSpectrum padded(Eigen::Index n) const {
    SingularSpectrum out;
    out.values_ = RealVector::Zero(std::max(n, values_.size()));
    out.values_.head(values_.size()) = values_;
    return out;
  }

  /// Partial sums S_m = sum_{k<m} mu(k), m = 1..n.
  RealVector partial_sums() const {
    RealVector s(values_.size());
    double acc = 0.0;
    for (Eigen::Index k = 0; k < values_.size(); ++k) s(k) = acc += values_(k);
    return s;
  }

 private:
  RealVector values_;
};

inline SingularSpectrum singular_spectrum(const ComplexMatrix& x, const ToleranceConfig& tol = {}) {
  return SingularSpectrum(singular_values(x, tol), tol);
}

namespace detail {

inline double submajorization_slack(const SingularSpectrum& x, const SingularSpectrum& y) {
  const Eigen::Index n = std::max(x.ambient_dim(), y.ambient_dim());
  const RealVector sx = x.padded(n).partial_sums();
  const RealVector sy = y.padded(n).partial_sums();
  return n == 0 ? 0.0 : (sy - sx).maxCoeff();
}

inline double mass_scale(const SingularSpectrum& x) { return std::max(1.0, x.values().sum()); }

}  // namespace detail

/// y is submajorized by x (y <<_w x): every partial sum of y is at most the
/// matching partial sum of x, within tol_cert relative to max(1, sum x).
inline bool submajorizes(const SingularSpectrum& x, const SingularSpectrum& y, const ToleranceConfig& tol = {}) {
  return detail::submajorization_slack(x, y) <= tol.tol_cert * detail::mass_scale(x);
}

/// Non-negative matrix with row and column sums at most one.
struct TransferMatrix {
  RealMatrix entries;

  bool is_doubly_substochastic(double tol) const {
    if (entries.size() == 0) return true;
    if (entries.minCoeff() < -tol) return false;
    return entries.rowwise().sum().maxCoeff() <= 1.0 + tol && entries.colwise().sum().maxCoeff() <= 1.0 + tol;
  }

  RealVector apply(const RealVector& x) const { return entries * x; }
};

/// Re-check a transfer certificate: doubly substochastic and D x = y.
inline bool verify_transfer(const TransferMatrix& d, const SingularSpectrum& x, const SingularSpectrum& y,
                            double tol) {
  const Eigen::Index n = d.entries.rows();
  if (d.entries.cols() != n || n < std::max(x.ambient_dim(), y.ambient_dim())) return false;
  if (!d.is_doubly_substochastic(tol)) return false;
  const RealVector residual = d.apply(x.padded(n).values()) - y.padded(n).values();
  return n == 0 || residual.cwiseAbs().maxCoeff() <= tol;
}

/// Doubly substochastic D with D x = y, for y <<_w x.
///
/// The mass deficit sum(x) - sum(y) is first poured into the smallest
/// entries of y (water filling), giving u >= y with u majorized by x and
/// still sorted. A chain of T-transforms then carries x to u, and a row
/// rescaling by y/u brings u down to y.
inline TransferMatrix transfer_certificate(const SingularSpectrum& x_in, const SingularSpectrum& y_in,
                                           const ToleranceConfig& tol = {}) {
  if (!submajorizes(x_in, y_in, tol))
    throw Error(ErrorCode::NotSubmajorized,
                "partial-sum excess " + std::to_string(detail::submajorization_slack(x_in, y_in)));
  const Eigen::Index n = std::max(x_in.ambient_dim(), y_in.ambient_dim());
  const RealVector x = x_in.padded(n).values();
  const RealVector y = y_in.padded(n).values();
  TransferMatrix out{RealMatrix::Identity(n, n)};
  if (n == 0) return out;

  // water filling: u_k = max(y_k, level) on the tail so that sum(u) = sum(x)
  RealVector u = y;
  const double deficit = x.sum() - y.sum();
  if (deficit > 0) {
    double tail = 0.0;
    for (Eigen::Index r = n - 1; r >= 0; --r) {
      tail += y(r);
      const double level = (tail + deficit) / static_cast<double>(n - r);
      const bool fits_above = r == 0 || y(r - 1) >= level;
      if (level >= y(r) && fits_above) {
        for (Eigen::Index k = r; k < n; ++k) u(k) = level;
        break;
      }
    }
  }

  // T-transforms carrying x to u
  const double eps = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, x.sum());
  RealVector z = x;
  RealMatrix p = RealMatrix::Identity(n, n);
  for (Eigen::Index step = 0; step < n * n; ++step) {
    Eigen::Index j = -1;
    for (Eigen::Index i = n - 1; i >= 0; --i)
      if (z(i) > u(i) + eps) {
        j = i;
        break;
      }
    if (j < 0) break;
    Eigen::Index k = -1;
    for (Eigen::Index i = j + 1; i < n; ++i)
      if (z(i) < u(i) - eps) {
        k = i;
        break;
      }
    if (k < 0) break;
    const double delta = std::min(z(j) - u(j), u(k) - z(k));
    const double beta = delta / (z(j) - z(k));
    const RealVector row_j = p.row(j), row_k = p.row(k);
    p.row(j) = (1 - beta) * row_j + beta * row_k;
    p.row(k) = beta * row_j + (1 - beta) * row_k;
    const double zj = z(j), zk = z(k);
    z(j) = (1 - beta) * zj + beta * zk;
    z(k) = beta * zj + (1 - beta) * zk;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = u(i) > 0 ? std::clamp(y(i) / u(i), 0.0, 1.0) : 0.0;
    p.row(i) *= scale;
  }
  out.entries = std::move(p);
  return out;
}

/// Unitarily invariant norm given by a symmetric gauge on the singular values.
struct Gauge {
  enum class Kind { schatten, kyfan };
  Kind kind = Kind::schatten;
  double p = 1.0;  // schatten exponent, may be +inf
  int k = 1;       // Ky Fan order

  static Gauge schatten(double p) { return {Kind::schatten, p, 1}; }
  static Gauge kyfan(int k) { return {Kind::kyfan, 1.0, k}; }
  static Gauge trace_class() { return schatten(1.0); }
  static Gauge operator_norm() { return schatten(std::numeric_limits<double>::infinity()); }

  /// "schatten:<p>", "schatten:inf", "kyfan:<k>", "trace", "operator".
  static Gauge parse(const std::string& text) {
    if (text == "trace") return trace_class();
    if (text == "operator") return operator_norm();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::BadGauge, "expected kind:parameter, got '" + text + "'");
    const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
    try {
      if (kind == "schatten")
        return arg == "inf" ? operator_norm() : schatten(std::stod(arg));
      if (kind == "kyfan") return kyfan(std::stoi(arg));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadGauge, "bad gauge parameter '" + arg + "'");
    }
    throw Error(ErrorCode::BadGauge, "unknown gauge '" + kind + "'");
  }

  std::string to_string() const {
    if (kind == Kind::kyfan) return "kyfan:" + std::to_string(k);
    if (std::isinf(p)) return "schatten:inf";
    std::string s = std::to_string(p);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return "schatten:" + s;
  }
};

inline double gauge_norm(const SingularSpectrum& mu, const Gauge& g) {
  const RealVector& v = mu.values();
  if (g.kind == Gauge::Kind::kyfan) {
    if (g.k < 1 || g.k > std::max<Eigen::Index>(1, v.size()))
      throw Error(ErrorCode::BadGauge, "Ky Fan order " + std::to_string(g.k) + " out of range");
    return v.head(std::min<Eigen::Index>(g.k, v.size())).sum();
  }
  if (!(g.p >= 1.0)) throw Error(ErrorCode::BadGauge, "Schatten exponent must be >= 1");
  if (v.size() == 0) return 0.0;
  if (std::isinf(g.p)) return v(0);
  if (g.p == 1.0) return v.sum();
  if (g.p == 2.0) return v.norm();
  const double top = v(0);
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (double s : v) acc += std::pow(s / top, g.p);
  return top * std::pow(acc, 1.0 / g.p);
}

inline double symmetric_norm(const ComplexMatrix& x, const Gauge& g, const ToleranceConfig& tol = {}) {
  return gauge_norm(singular_spectrum(x, tol), g);
}

using Partition = std::vector<std::vector<Eigen::Index>>;

/// Block-diagonal compression sum_i e_i x e_i over the coordinate blocks.
inline ComplexMatrix pinch(const ComplexMatrix& x, const Partition& blocks) {
  require_square(x, "pinch argument");
  const Eigen::Index n = x.rows();
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw Error(ErrorCode::BadPartition, "empty block");
    for (auto i : blocks[b]) {
      if (i < 0 || i >= n) throw Error(ErrorCode::BadPartition, "index " + std::to_string(i) + " out of range");
      if (owner[static_cast<std::size_t>(i)] != -1)
        throw Error(ErrorCode::BadPartition, "index " + std::to_string(i) + " repeated");
      owner[static_cast<std::size_t>(i)] = static_cast<int>(b);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (owner[static_cast<std::size_t>(i)] == -1)
      throw Error(ErrorCode::BadPartition, "index " + std::to_string(i) + " not covered");
  ComplexMatrix out = x;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)]) out(i, j) = 0.0;
  return out;
}

inline Partition contiguous_blocks(Eigen::Index n, Eigen::Index block) {
  Partition p;
  for (Eigen::Index start = 0; start < n; start += block) {
    std::vector<Eigen::Index> b;
    for (Eigen::Index i = start; i < std::min(n, start + block); ++i) b.push_back(i);
    p.push_back(std::move(b));
  }
  return p;
}

struct MuOrderResult {
  bool order_holds = false;         // -a <= b <= a
  bool spectrum_dominated = false;  // mu_b <= mu_a pointwise
  bool submajorized = false;        // mu_b <<_w mu_a
  double max_excess = 0.0;          // max_k mu_b(k) - mu_a(k)

  explicit operator bool() const { return order_holds && spectrum_dominated; }
};

/// For Hermitian a, b with -a <= b <= a, compares mu_b with mu_a.
///
/// Only the weak majorization mu_b <<_w mu_a is guaranteed by the order:
/// a = diag(1, 1/4), b = [[0, 1/2], [1/2, 0]] satisfies -a <= b <= a with
/// mu_b = (1/2, 1/2), so the pointwise comparison can fail. Both results
/// are reported; spectrum and submajorization fields are only evaluated
/// when the order holds.
inline MuOrderResult mu_order_check(const ComplexMatrix& a, const ComplexMatrix& b, const ToleranceConfig& tol = {}) {
  require_same_shape(a, b, "mu_order_check");
  MuOrderResult out;
  out.order_holds = is_psd(a - b, tol).holds && is_psd(a + b, tol).holds;
  if (!out.order_holds) return out;
  const RealVector ma = singular_spectrum(a, tol).values();
  const RealVector mb = singular_spectrum(b, tol).values();
  out.max_excess = ma.size() ? (mb - ma).maxCoeff() : 0.0;
  out.spectrum_dominated = out.max_excess <= tol.tol_cert * std::max(1.0, ma.size() ? ma(0) : 0.0);
  out.submajorized = submajorizes(SingularSpectrum(ma, tol), SingularSpectrum(mb, tol), tol);
  return out;
}

}  // namespace domcheck
