#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "domcheck/error.hpp"

namespace domcheck {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be square");
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

/// E_ij in M_n: 1 in position (i, j), zeros elsewhere.
inline ComplexMatrix matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Transpose on the first tensor factor of an operator on C^d1 (x) C^d2.
inline ComplexMatrix partial_transpose_first(const ComplexMatrix& m, Eigen::Index d1, Eigen::Index d2) {
  if (m.rows() != d1 * d2 || m.cols() != d1 * d2)
    throw Error(ErrorCode::DimensionMismatch, "partial transpose: size does not match d1*d2");
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j) out.block(j * d2, i * d2, d2, d2) = m.block(i * d2, j * d2, d2, d2);
  return out;
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

inline Complex trace(const ComplexMatrix& a) {
  require_square(a, "trace argument");
  return a.trace();
}

/// max_ij |a_ij - conj(a_ji)|
inline double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& a, double tol_herm) {
  return hermitian_defect(a) <= tol_herm * frobenius_norm(a);
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline ComplexMatrix diag(std::initializer_list<Complex> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  Eigen::Index k = 0;
  for (const auto& v : values) out(k, k) = v, ++k;
  return out;
}

inline ComplexMatrix from_real(const RealMatrix& a) { return a.cast<Complex>(); }

}  // namespace domcheck
