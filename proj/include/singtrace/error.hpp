#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace singtrace {

enum class ErrorKind {
  InvalidInput,
  NegativeValue,
  NonpositiveWeight,
  NonpositiveLambda,
  NotInfinitesimal,
  HorizonExceeded,
  UndecidedBranch,
  ZeroDenominator,
  SupportExceeded,
  HorizonTooShort,
  PreconditionFailed,
  NoWitnessOnHorizon,
  NotApplicable,
  NotRegular,
  FiniteRank,
  Bounded,
  VerificationFailed,
  QuadratureFailure,
};

inline constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NegativeValue: return "NegativeValue";
    case ErrorKind::NonpositiveWeight: return "NonpositiveWeight";
    case ErrorKind::NonpositiveLambda: return "NonpositiveLambda";
    case ErrorKind::NotInfinitesimal: return "NotInfinitesimal";
    case ErrorKind::HorizonExceeded: return "HorizonExceeded";
    case ErrorKind::UndecidedBranch: return "UndecidedBranch";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::SupportExceeded: return "SupportExceeded";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::NoWitnessOnHorizon: return "NoWitnessOnHorizon";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::FiniteRank: return "FiniteRank";
    case ErrorKind::Bounded: return "Bounded";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library. The kind is stable and machine
/// readable; the message carries the human diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace singtrace
