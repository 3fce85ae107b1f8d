#ifndef GRADFLOW_ERROR_HPP
#define GRADFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gradflow {

enum class ErrorCode {
  ResolutionTooLow,
  SizeMismatch,
  InvalidArgument,
  Overflow,
  UndefinedPotential,
  NoEquilibrium,
  ZeroState,
  DegenerateProjection,
  NoConvergence,
  SingularJacobian,
  InsufficientData,
  HypothesisFailed,
  OutOfRange,
  StepFailure,
  Config,
  UnknownPreset,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code), detail_(msg) {}

  ErrorCode code() const { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gradflow

#endif
