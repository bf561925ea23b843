#include "qeflab/error.hpp"

namespace qeflab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotAntisymmetric: return "NotAntisymmetric";
    case ErrorCode::SingularTheta: return "SingularTheta";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::SingularMho: return "SingularMho";
    case ErrorCode::CouplingRankDeficient: return "CouplingRankDeficient";
    case ErrorCode::LyapunovSolveFailed: return "LyapunovSolveFailed";
    case ErrorCode::SingularS: return "SingularS";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonpositiveOmega: return "NonpositiveOmega";
    case ErrorCode::DeterminantIdentityViolated: return "DeterminantIdentityViolated";
    case ErrorCode::SingularG: return "SingularG";
    case ErrorCode::NoRootsFound: return "NoRootsFound";
    case ErrorCode::RefinementStalled: return "RefinementStalled";
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::RankCollapse: return "RankCollapse";
    case ErrorCode::CaptureUnreachable: return "CaptureUnreachable";
    case ErrorCode::StateUnavailable: return "StateUnavailable";
    case ErrorCode::ThetaSupercritical: return "ThetaSupercritical";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::OverflowDominated: return "OverflowDominated";
    case ErrorCode::CovarianceNotPSD: return "CovarianceNotPSD";
    case ErrorCode::QuadratureUnderresolved: return "QuadratureUnderresolved";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

}  // namespace qeflab
