#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftx {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  Infeasible,
  NumericalFailure,
  Io,
  Parse,
  MagicMismatch,
  VersionMismatch,
  Truncated,
  BasisMismatch,
  MissingShard,
  Diverged,
  OutOfMemory,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every throw site in driftx uses this type so callers
/// can branch on code() instead of parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace driftx
