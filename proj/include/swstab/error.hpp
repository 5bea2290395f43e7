#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swstab {

enum class ErrorCode {
  invalid_input,
  not_hurwitz,
  trace_zero,
  domain_error,
  precondition,
  degenerate_basis,
  wrong_case,
  singular_a2,
  witness_not_found,
  delta_non_positive,
  no_crossing,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::not_hurwitz: return "NotHurwitz";
    case ErrorCode::trace_zero: return "TraceZero";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::precondition: return "PreconditionError";
    case ErrorCode::degenerate_basis: return "DegenerateBasis";
    case ErrorCode::wrong_case: return "WrongCase";
    case ErrorCode::singular_a2: return "SingularA2";
    case ErrorCode::witness_not_found: return "WitnessNotFound";
    case ErrorCode::delta_non_positive: return "DeltaNonPositive";
    case ErrorCode::no_crossing: return "NoCrossing";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can report it per pair without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace swstab
