#pragma once
#include <stdexcept>
#include <string>

namespace bt {

// every failure mode that callers are expected to branch on gets a stable code
enum class ErrorCode {
  SectorViolation,
  PoleProximity,
  DegenerateMaximum,
  DimensionUnsupported,
  ForbiddenRadius,
  InvalidScaling,
  NoConvergence,
  SectorUncovered,
  ContourTooClose,
  QuadratureDivergence,
  StepFailure,
  WindowTooShort,
  IllConditioned,
  LongRangeUnsupported,
  TailDivergence,
  PrescriptionNotInKernel,
  TruncationTooLow,
  ContractionViolated,
  TailTruncationError,
  PrescriptionDrift,
  RankDeficiency,
  NormalizationDegenerate,
  InconsistentFactorization,
  WindowInClassicallyForbiddenRegion,
  MatchingRadiusTooSmall,
  StiffnessFailure,
  MethodDisagreement,
  PoleMissed,
  NonSimpleResonance,
  NoExponentialRegime,
  ConfigError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bt
