#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pks {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteField,
  InvalidTime,
  NonFiniteRhs,
  StepDiverged,
  TimeStepCollapse,
  NotARemainder,
  NegativeDensity,
  CannotFitLog,
  InsufficientData,
  NotMeanZero,
  ExponentCondition,
  ConfigError,
  UnderResolved,
  RunIoError,
  SnapshotFormat,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::InvalidTime: return "InvalidTime";
    case ErrorCode::NonFiniteRhs: return "NonFiniteRhs";
    case ErrorCode::StepDiverged: return "StepDiverged";
    case ErrorCode::TimeStepCollapse: return "TimeStepCollapse";
    case ErrorCode::NotARemainder: return "NotARemainder";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::CannotFitLog: return "CannotFitLog";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NotMeanZero: return "NotMeanZero";
    case ErrorCode::ExponentCondition: return "ExponentCondition";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::RunIoError: return "RunIoError";
    case ErrorCode::SnapshotFormat: return "SnapshotFormat";
  }
  return "Unknown";
}

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace pks
