#pragma once

#include <cstdint>

#include "domcheck/error.hpp"

namespace domcheck {

/// Numerical thresholds shared by every check. All verdicts are pure
/// functions of their inputs and one of these.
struct ToleranceConfig {
  double tol_psd = 1e-9;   // relative PSD decision threshold
  double tol_eig = 1e-11;  // eigensolver reconstruction / off-diagonal mass
  double tol_herm = 1e-10; // Hermitian check, relative to the Frobenius norm
  double tol_cert = 1e-7;  // certificate re-verification
  int max_iters = 20000;
  int restarts = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(tol_psd > 0 && tol_eig > 0 && tol_herm > 0 && tol_cert > 0))
      throw Error(ErrorCode::BadConfig, "tolerances must be strictly positive");
    if (restarts < 1) throw Error(ErrorCode::BadConfig, "restarts must be >= 1");
    if (max_iters < 1) throw Error(ErrorCode::BadConfig, "max_iters must be >= 1");
  }
};

/// Normality and generating constants of an ordered normed space.
struct SpaceConstants {
  double normality = 2.0;
  double generating = 2.0;

  /// Schatten classes and every other non-commutative function space.
  static constexpr SpaceConstants noncommutative() { return {2.0, 2.0}; }
};

}  // namespace domcheck
