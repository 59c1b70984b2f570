#pragma once

#include <stdexcept>
#include <string>

namespace gasnet {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteEntry,
  MixedTimebase,
  EmptyAggregate,
  SingularAtS,
  EigenFailure,
  InvalidParams,
  AlgebraicLoop,
  AmbiguousBoundary,
  UnstableInput,
  TargetTooSmall,
  NotStabilizable,
  NotStrictlyProper,
  InvalidWeights,
  NotSettled,
  CountMismatch,
  IoError,
};

const char* error_code_name(ErrorCode code);

// Single exception type; the code carries the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::MixedTimebase: return "MixedTimebase";
    case ErrorCode::EmptyAggregate: return "EmptyAggregate";
    case ErrorCode::SingularAtS: return "SingularAtS";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::AlgebraicLoop: return "AlgebraicLoop";
    case ErrorCode::AmbiguousBoundary: return "AmbiguousBoundary";
    case ErrorCode::UnstableInput: return "UnstableInput";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotStrictlyProper: return "NotStrictlyProper";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::NotSettled: return "NotSettled";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace gasnet
