#include "pcw/error.hpp"

namespace pcw {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::CladdingTooThin: return "cladding-too-thin";
    case ErrorKind::ResolutionTooLow: return "resolution-too-low";
    case ErrorKind::AliasingRisk: return "aliasing-risk";
    case ErrorKind::BasisMismatch: return "basis-mismatch";
    case ErrorKind::EigensolverFailure: return "eigensolver-failure";
    case ErrorKind::MissingEigenvector: return "missing-eigenvector";
    case ErrorKind::DefectPresent: return "defect-present";
    case ErrorKind::InsufficientKSampling: return "insufficient-k-sampling";
    case ErrorKind::AxisMismatch: return "axis-mismatch";
    case ErrorKind::TooFewSamples: return "too-few-samples";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::OverlappingWindows: return "overlapping-windows";
    case ErrorKind::BudgetExceeded: return "combinatorial-budget-exceeded";
    case ErrorKind::ZeroVector: return "zero-vector";
    case ErrorKind::MomentumMismatch: return "momentum-mismatch";
    case ErrorKind::SchemaViolation: return "schema-violation";
    case ErrorKind::IoFailure: return "io-failure";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace pcw
