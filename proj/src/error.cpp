#include "gradflow/error.hpp"

namespace gradflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ResolutionTooLow: return "resolution too low";
    case ErrorCode::SizeMismatch: return "size mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::UndefinedPotential: return "undefined potential";
    case ErrorCode::NoEquilibrium: return "no equilibrium";
    case ErrorCode::ZeroState: return "zero state";
    case ErrorCode::DegenerateProjection: return "degenerate projection";
    case ErrorCode::NoConvergence: return "no convergence";
    case ErrorCode::SingularJacobian: return "singular jacobian";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::HypothesisFailed: return "hypothesis failed";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::StepFailure: return "step failure";
    case ErrorCode::Config: return "config error";
    case ErrorCode::UnknownPreset: return "unknown preset";
  }
  return "error";
}

}  // namespace gradflow
