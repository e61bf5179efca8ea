#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcw {

enum class ErrorKind {
  InvalidArgument,
  CladdingTooThin,
  ResolutionTooLow,
  AliasingRisk,
  BasisMismatch,
  EigensolverFailure,
  MissingEigenvector,
  DefectPresent,
  InsufficientKSampling,
  AxisMismatch,
  TooFewSamples,
  GridMismatch,
  OverlappingWindows,
  BudgetExceeded,
  ZeroVector,
  MomentumMismatch,
  SchemaViolation,
  IoFailure,
};

/// Stable kebab-case identifier, used in CLI diagnostics.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace pcw
