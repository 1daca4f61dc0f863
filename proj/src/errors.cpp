#include "sticky/errors.hpp"

namespace sticky {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::pole: return "PoleError";
    case ErrorCode::domain: return "DomainError";
    case ErrorCode::branch: return "BranchError";
    case ErrorCode::pole_proximity: return "PoleProximityError";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::nesting: return "NestingError";
    case ErrorCode::truncation: return "TruncationError";
    case ErrorCode::tail: return "TailError";
    case ErrorCode::degenerate_state: return "DegenerateStateError";
    case ErrorCode::window: return "WindowError";
    case ErrorCode::underflow: return "UnderflowError";
    case ErrorCode::schema: return "SchemaError";
    case ErrorCode::io: return "IOError";
    case ErrorCode::numeric: return "NumericError";
  }
  return "Unknown";
}

}  // namespace sticky
