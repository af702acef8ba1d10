#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "domcheck/certificate.hpp"
#include "domcheck/config.hpp"
#include "domcheck/matrix.hpp"

namespace domcheck {

/// a = Q diag(eigenvalues) Q*, eigenvalues non-increasing.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  ComplexMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  }

  double max_abs() const { return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff(); }
  double min() const { return eigenvalues.size() == 0 ? 0.0 : eigenvalues(eigenvalues.size() - 1); }

  /// Q f(Lambda) Q*
  template <class F>
  ComplexMatrix apply(F&& f) const {
    RealVector mapped(eigenvalues.size());
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) mapped(i) = f(eigenvalues(i));
    return eigenvectors * mapped.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  }
};

namespace detail {

inline constexpr int kJacobiSweeps = 100;

inline double offdiagonal_mass(const ComplexMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace detail

/// Cyclic Jacobi for complex Hermitian matrices. Each pair (p, q) is
/// annihilated by G = D R where D = diag(1, conj(e)) removes the phase
/// e of a_pq and R is the real symmetric Jacobi rotation.
inline SpectralDecomposition eig_hermitian(const ComplexMatrix& input, const ToleranceConfig& tol = {}) {
  require_square(input, "eig_hermitian argument");
  if (!is_hermitian(input, tol.tol_herm))
    throw Error(ErrorCode::NotHermitian, "defect " + std::to_string(hermitian_defect(input)));

  const Eigen::Index n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::Identity(n, n);
  const double scale = frobenius_norm(a);
  const double target = tol.tol_eig * scale;

  bool converged = n <= 1 || scale == 0.0;
  for (int sweep = 0; sweep < detail::kJacobiSweeps && !converged; ++sweep) {
    if (detail::offdiagonal_mass(a) <= target) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g <= std::numeric_limits<double>::min() * 16) continue;
        const Complex e = apq / g;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex ce = std::conj(e);

        // columns: A <- A G
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * ce * akq;
          a(k, q) = s * akp + c * ce * akq;
        }
        // rows: A <- G* A
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * e * aqk;
          a(q, k) = s * apk + c * e * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app - t * g;
        a(q, q) = aqq + t * g;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * ce * vkq;
          v(k, q) = s * vkp + c * ce * vkq;
        }
      }
    }
  }
  if (!converged && detail::offdiagonal_mass(a) > target)
    throw Error(ErrorCode::NoConvergence, "Jacobi sweep budget exhausted");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]).real();
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

/// Result of a PSD test. On failure the certificate holds the unit
/// eigenvector of the smallest eigenvalue.
struct PsdCheck {
  bool holds = false;
  double min_eigenvalue = 0.0;
  Certificate certificate;

  explicit operator bool() const { return holds; }
};

inline double psd_threshold(double norm2, const ToleranceConfig& tol) {
  return -tol.tol_psd * std::max(1.0, norm2);
}

inline PsdCheck is_psd(const ComplexMatrix& a, const ToleranceConfig& tol = {}) {
  const auto dec = eig_hermitian(a, tol);
  PsdCheck out;
  out.min_eigenvalue = dec.min();
  out.holds = a.rows() == 0 || out.min_eigenvalue >= psd_threshold(dec.max_abs(), tol);
  if (!out.holds) {
    out.certificate.kind = CertificateKind::psd_witness;
    const ComplexVector xi = dec.eigenvectors.col(a.rows() - 1);
    out.certificate.vectors.push_back(xi);
    out.certificate.value = (xi.adjoint() * a * xi)(0, 0).real();
  }
  return out;
}

/// Re-check a psd-witness: <M xi, xi> reproduces the stored value and is negative.
inline bool verify_psd_witness(const ComplexMatrix& m, const Certificate& cert, double abs_tol = 1e-10) {
  if (cert.kind != CertificateKind::psd_witness || cert.vectors.empty()) return false;
  const ComplexVector& xi = cert.vectors.front();
  if (xi.size() != m.rows()) return false;
  const double q = (xi.adjoint() * m * xi)(0, 0).real();
  return q < 0 && std::abs(q - cert.value) <= abs_tol * std::max(1.0, std::abs(cert.value));
}

/// a^alpha for PSD a. Eigenvalues in [-tol_psd*||a||, 0) are clipped to 0.
inline ComplexMatrix spectral_power(const ComplexMatrix& a, double alpha, const ToleranceConfig& tol = {}) {
  if (!(alpha > 0)) throw Error(ErrorCode::BadRange, "spectral_power exponent must be positive");
  const auto dec = eig_hermitian(a, tol);
  const double floor = -tol.tol_psd * dec.max_abs();
  if (dec.min() < floor) throw Error(ErrorCode::NotPSD, "min eigenvalue " + std::to_string(dec.min()));
  if (alpha == 1.0) return hermitian_part(a);
  return dec.apply([alpha](double x) { return x > 0 ? std::pow(x, alpha) : 0.0; });
}

inline constexpr double kRankCut = 1e-10;

/// Support-restricted a^{-alpha}: eigenvalues at or below kRankCut*lambda_max map to 0.
inline ComplexMatrix pseudo_inverse_root(const ComplexMatrix& a, double alpha, const ToleranceConfig& tol = {}) {
  if (!(alpha > 0)) throw Error(ErrorCode::BadRange, "pseudo_inverse_root exponent must be positive");
  const auto dec = eig_hermitian(a, tol);
  if (dec.min() < -tol.tol_psd * dec.max_abs())
    throw Error(ErrorCode::NotPSD, "min eigenvalue " + std::to_string(dec.min()));
  const double cut = kRankCut * (dec.eigenvalues.size() ? dec.eigenvalues(0) : 0.0);
  return dec.apply([=](double x) { return x > cut && x > 0 ? std::pow(x, -alpha) : 0.0; });
}

/// Orthogonal projection onto the numerical support of PSD a.
inline ComplexMatrix support_projection(const ComplexMatrix& a, const ToleranceConfig& tol = {}) {
  const auto dec = eig_hermitian(a, tol);
  const double cut = kRankCut * (dec.eigenvalues.size() ? dec.eigenvalues(0) : 0.0);
  return dec.apply([=](double x) { return x > cut && x > 0 ? 1.0 : 0.0; });
}

/// Singular values of any matrix, non-increasing, zero-padded to max(rows, cols).
/// Hermitian input uses |eigenvalues|; otherwise the top eigenvalues of the
/// dilation [[0, x], [x*, 0]], which avoids squaring small singular values.
inline RealVector singular_values(const ComplexMatrix& x, const ToleranceConfig& tol = {}) {
  const Eigen::Index n = std::max(x.rows(), x.cols());
  RealVector out = RealVector::Zero(n);
  if (x.size() == 0) return out;
  if (x.rows() == x.cols() && is_hermitian(x, tol.tol_herm)) {
    out = eig_hermitian(x, tol).eigenvalues.cwiseAbs();
    std::sort(out.data(), out.data() + out.size(), std::greater<>());
    return out;
  }
  const Eigen::Index m = x.rows() + x.cols();
  ComplexMatrix dilation = ComplexMatrix::Zero(m, m);
  dilation.topRightCorner(x.rows(), x.cols()) = x;
  dilation.bottomLeftCorner(x.cols(), x.rows()) = x.adjoint();
  const auto dec = eig_hermitian(dilation, tol);
  for (Eigen::Index i = 0; i < std::min(x.rows(), x.cols()); ++i) out(i) = std::max(0.0, dec.eigenvalues(i));
  return out;
}

inline double operator_norm(const ComplexMatrix& a, const ToleranceConfig& tol = {}) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && is_hermitian(a, tol.tol_herm)) return eig_hermitian(a, tol).max_abs();
  return singular_values(a, tol)(0);
}

}  // namespace domcheck
