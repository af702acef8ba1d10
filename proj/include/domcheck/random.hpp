#pragma once

#include <cstdint>
#include <random>

#include <Eigen/QR>

#include "domcheck/matrix.hpp"

namespace domcheck {

using Rng = std::mt19937_64;

/// Stream `index` derived from a base seed (splitmix64 step), so Monte
/// Carlo batches are reproducible independently of each other.
inline Rng derived_rng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Rng(z ^ (z >> 31));
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline ComplexMatrix random_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline ComplexVector random_unit_vector(Rng& rng, Eigen::Index n) {
  ComplexVector v = random_gaussian(rng, n, 1).col(0);
  return v / v.norm();
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  const ComplexMatrix g = random_gaussian(rng, n, n);
  return 0.5 * (g + g.adjoint());
}

/// b b* with b n x rank; rank defaults to n.
inline ComplexMatrix random_psd(Rng& rng, Eigen::Index n, Eigen::Index rank = -1) {
  if (rank < 0) rank = n;
  const ComplexMatrix b = random_gaussian(rng, n, rank);
  return b * b.adjoint();
}

inline ComplexMatrix random_unitary(Rng& rng, Eigen::Index n) {
  const ComplexMatrix g = random_gaussian(rng, n, n);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0) q.col(i) *= r(i, i) / mag;
  }
  return q;
}

}  // namespace domcheck
