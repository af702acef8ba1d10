#pragma once

// Generators shared by the unit and acceptance suites.

#include "domcheck/random.hpp"
#include "domcheck/spectral.hpp"

namespace domcheck::testing {

/// Hermitian h with ||h|| <= bound.
inline ComplexMatrix random_hermitian_contraction(Rng& rng, Eigen::Index n, double bound = 1.0) {
  const ComplexMatrix h = random_hermitian(rng, n);
  const double norm = operator_norm(h);
  return norm > 0 ? ComplexMatrix(h * (bound * uniform(rng, 0.2, 1.0) / norm)) : h;
}

/// 0 <= w <= 1.
inline ComplexMatrix random_positive_contraction(Rng& rng, Eigen::Index n) {
  const ComplexMatrix p = random_psd(rng, n, uniform_int(rng, 1, static_cast<int>(n)));
  const double norm = operator_norm(p);
  return norm > 0 ? ComplexMatrix(p * (uniform(rng, 0.1, 1.0) / norm)) : p;
}

/// (a, b) with -a <= b <= a: b = a^{1/2} h a^{1/2} for a Hermitian contraction h.
inline std::pair<ComplexMatrix, ComplexMatrix> random_order_pair(Rng& rng, Eigen::Index n) {
  const ComplexMatrix a = random_psd(rng, n, uniform_int(rng, 1, static_cast<int>(n)));
  const ComplexMatrix root = spectral_power(a, 0.5);
  const ComplexMatrix h = random_hermitian_contraction(rng, n, 0.999);
  const ComplexMatrix b = root * h * root;
  return {a, 0.5 * (b + b.adjoint())};
}

}  // namespace domcheck::testing
