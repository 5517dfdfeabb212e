#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bingham {

enum class ErrorCode {
  ZeroNorm,
  DegenerateColumns,
  DegenerateScatter,
  OutOfRange,
  IoError,
  EmptyInput,
  ShapeMismatch,
  DivergenceDetected,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; the code
// identifies the failure class so callers (and the CLI) can map it.
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
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::DegenerateColumns: return "DegenerateColumns";
    case ErrorCode::DegenerateScatter: return "DegenerateScatter";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace bingham
