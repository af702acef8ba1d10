#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace domcheck {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  NotPSD,
  NotSubmajorized,
  BadGauge,
  BadPartition,
  DimensionMismatch,
  NotMember,
  BadRange,
  InsufficientSpectrum,
  BadK,
  NotCP,
  BadThreshold,
  InfeasibleParameters,
  WitnessFailed,
  UnknownId,
  ParseError,
  SchemaError,
  BadConfig,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotSubmajorized: return "NotSubmajorized";
    case ErrorCode::BadGauge: return "BadGauge";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotMember: return "NotMember";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::InsufficientSpectrum: return "InsufficientSpectrum";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::NotCP: return "NotCP";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::InfeasibleParameters: return "InfeasibleParameters";
    case ErrorCode::WitnessFailed: return "WitnessFailed";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace domcheck
