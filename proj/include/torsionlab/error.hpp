#pragma once

#include <stdexcept>
#include <string>

namespace torsionlab {

enum class ErrorKind {
  ZeroVector,
  RefinementExhausted,
  JumpTooLarge,
  NumericOverflow,
  DegenerateDifferential,
  DiagonalInput,
  SeparationCollapse,
  BisectionStall,
  VariantMismatch,
  NotTwist,
  PeriodicityViolation,
  UnknownSystem,
  InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::RefinementExhausted: return "RefinementExhausted";
    case ErrorKind::JumpTooLarge: return "JumpTooLarge";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::DegenerateDifferential: return "DegenerateDifferential";
    case ErrorKind::DiagonalInput: return "DiagonalInput";
    case ErrorKind::SeparationCollapse: return "SeparationCollapse";
    case ErrorKind::BisectionStall: return "BisectionStall";
    case ErrorKind::VariantMismatch: return "VariantMismatch";
    case ErrorKind::NotTwist: return "NotTwist";
    case ErrorKind::PeriodicityViolation: return "PeriodicityViolation";
    case ErrorKind::UnknownSystem: return "UnknownSystem";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every library failure carries a kind so callers (and the CLI) can branch
// on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace torsionlab
