#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anosov {

enum class ErrorCode {
  // input / validation
  NotUnimodular,
  NotHyperbolic,
  NegativeEigenvalues,
  InvalidQuadruple,
  EnumerationCapExceeded,
  RealityViolation,
  InsufficientScales,
  C1BoundExceeded,
  InvalidModel,
  TransversalityFailure,
  ChartNotAdapted,
  ZetaVanished,
  SchemaError,
  IoError,
  // numerical
  NoConvergence,
  MeanObstruction,
  InverseNewtonDiverged,
  SplittingCollapse,
  NewtonDiverged,
  HyperbolicityLost,
  MatchFailed,
  NonpositiveRoof,
  DivergentSeries,
  UniquenessSuspect,
};

std::string_view to_string(ErrorCode code);

/// True for failures of an iterative/numerical procedure (CLI exit status 3);
/// false for rejected inputs (exit status 2).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace anosov
