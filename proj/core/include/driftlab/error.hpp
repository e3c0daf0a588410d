#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftlab {

enum class ErrorCode {
  InvalidArgument,
  NotIrreducible,
  NonConvergence,
  SolverFailure,
  NoRoot,
  NotPersistentAtZeroAdvection,
  ResidentNotEstablished,
  InvaderNotEstablished,
  OutOfRange,
  StepSizeUnderflow,
  PreconditionViolation,
  UnsupportedCase,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI, sweeps) can react to the category without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace driftlab
