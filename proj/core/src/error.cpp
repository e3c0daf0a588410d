#include "driftlab/error.hpp"

namespace driftlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::NotPersistentAtZeroAdvection: return "NotPersistentAtZeroAdvection";
    case ErrorCode::ResidentNotEstablished: return "ResidentNotEstablished";
    case ErrorCode::InvaderNotEstablished: return "InvaderNotEstablished";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace driftlab
