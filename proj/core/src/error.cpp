#include "driftx/error.hpp"

namespace driftx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::Infeasible: return "infeasible request";
    case ErrorCode::NumericalFailure: return "numerical failure";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::MagicMismatch: return "magic mismatch";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::Truncated: return "truncated input";
    case ErrorCode::BasisMismatch: return "basis mismatch";
    case ErrorCode::MissingShard: return "missing shard";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::OutOfMemory: return "out of memory";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace driftx
