#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stagewise {

enum class ErrorCode {
  ZeroColumn,
  NonFiniteInput,
  InvalidArgument,
  ParseError,
  MissingResponseColumn,
  DegenerateMatrix,
  EpsilonOutOfRange,
  GridTooShort,
  MaxItersExceeded,
  InfeasibleBeta,
  UnboundedBelow,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingResponseColumn: return "MissingResponseColumn";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::GridTooShort: return "GridTooShort";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::InfeasibleBeta: return "InfeasibleBeta";
    case ErrorCode::UnboundedBelow: return "UnboundedBelow";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stagewise
