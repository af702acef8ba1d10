#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "domcheck/matrix.hpp"

namespace domcheck {

enum class CertificateKind {
  none,                // verdict needs no evidence (e.g. a passing PSD test)
  structural,          // exact rule; `note` names it
  psd_witness,         // vector xi with <M xi, xi> = value < 0
  product_witness,     // xi (x) eta with <J zeta, zeta> = value < 0
  schmidt_witness,     // Schmidt-rank <= k vector with <J zeta, zeta> = value < 0
  decomposition_pair,  // matrices {A, B}: J = A + B^Gamma, A, B PSD
  ppt_witness,         // state rho: rho, rho^Gamma PSD, tr(rho J) = value < 0
  inconclusive,        // search budget exhausted; `budget` records it
};

inline std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::none: return "none";
    case CertificateKind::structural: return "structural";
    case CertificateKind::psd_witness: return "psd-witness";
    case CertificateKind::product_witness: return "product-witness";
    case CertificateKind::schmidt_witness: return "schmidt-witness";
    case CertificateKind::decomposition_pair: return "decomposition-pair";
    case CertificateKind::ppt_witness: return "ppt-witness";
    case CertificateKind::inconclusive: return "inconclusive";
  }
  return "none";
}

/// Evidence attached to a verdict. Payload layout depends on `kind`; see
/// the verify_* routines next to the code that produces each kind.
struct Certificate {
  CertificateKind kind = CertificateKind::none;
  std::vector<ComplexVector> vectors;
  std::vector<ComplexMatrix> matrices;
  double value = 0.0;
  std::int64_t budget = 0;
  std::string note;

  static Certificate structural(std::string rule) {
    Certificate c;
    c.kind = CertificateKind::structural;
    c.note = std::move(rule);
    return c;
  }
};

}  // namespace domcheck
