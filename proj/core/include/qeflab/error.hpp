#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qeflab {

enum class ErrorCode {
  InvalidArgument,
  NotAntisymmetric,
  SingularTheta,
  NotHurwitz,
  SingularMho,
  CouplingRankDeficient,
  LyapunovSolveFailed,
  SingularS,
  NonFinite,
  GridMismatch,
  NonpositiveOmega,
  DeterminantIdentityViolated,
  SingularG,
  NoRootsFound,
  RefinementStalled,
  EmptyKernel,
  RankCollapse,
  CaptureUnreachable,
  StateUnavailable,
  ThetaSupercritical,
  NegativeEigenvalue,
  OverflowDominated,
  CovarianceNotPSD,
  QuadratureUnderresolved,
  SchemaViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace qeflab
