#include "qeflab/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

constexpr double kSymmetryTol = 1e-10;

double asymmetry(const Matrix& x, double sign) {
  return (x - sign * x.transpose()).norm() / std::max(1.0, x.norm());
}

void require_hurwitz(const Matrix& drift) {
  const double re = max_real_eigenvalue(drift);
  if (!(re < -kHurwitzMargin)) {
    std::ostringstream os;
    os << "drift matrix is not Hurwitz (max Re eigenvalue " << re << ")";
    fail(ErrorCode::NotHurwitz, os.str());
  }
}

}  // namespace

double max_real_eigenvalue(const Matrix& x) {
  if (x.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(x, false);
  return es.eigenvalues().real().maxCoeff();
}

void validate(const OscillatorSpec& spec) {
  const int n = spec.n();
  if (n <= 0 || n % 2 != 0 || spec.ccr.cols() != n)
    fail(ErrorCode::InvalidArgument, "Theta must be square of even positive order");
  if (spec.energy.rows() != n || spec.energy.cols() != n)
    fail(ErrorCode::InvalidArgument, "R must be n x n");
  if (spec.m() <= 0 || spec.m() % 2 != 0 || spec.coupling.cols() != n)
    fail(ErrorCode::InvalidArgument, "M must be m x n with even positive m");
  if (!spec.ccr.allFinite() || !spec.energy.allFinite() || !spec.coupling.allFinite() ||
      !std::isfinite(spec.horizon) || !std::isfinite(spec.risk_sensitivity))
    fail(ErrorCode::NonFinite, "oscillator data must be finite");
  if (!(spec.horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon T must be positive");
  if (spec.risk_sensitivity < 0.0) fail(ErrorCode::InvalidArgument, "risk sensitivity must be nonnegative");
  if (asymmetry(spec.ccr, -1.0) > kSymmetryTol)
    fail(ErrorCode::NotAntisymmetric, "Theta is not antisymmetric");
  if (asymmetry(spec.energy, 1.0) > kSymmetryTol)
    fail(ErrorCode::InvalidArgument, "R is not symmetric");
  if (is_singular(spec.ccr)) fail(ErrorCode::SingularTheta, "Theta is singular");
}

SystemMatrices build_system(const OscillatorSpec& spec) {
  validate(spec);
  SystemMatrices sys;
  sys.field_j = canonical_j(spec.m());
  const Matrix& theta = spec.ccr;
  const Matrix& m = spec.coupling;
  sys.drift = 2.0 * theta * (spec.energy + m.transpose() * sys.field_j * m);
  sys.dispersion = 2.0 * theta * m.transpose();
  sys.mho = sys.dispersion * sys.field_j * sys.dispersion.transpose();
  sys.pr_residual = (sys.drift * theta + theta * sys.drift.transpose() + sys.mho).norm();
  sys.max_real_eigenvalue = max_real_eigenvalue(sys.drift);
  sys.hurwitz = sys.max_real_eigenvalue < -kHurwitzMargin;
  sys.mho_singular = is_singular(sys.mho);
  return sys;
}

bool coupling_full_rank(const OscillatorSpec& spec) {
  if (spec.m() < spec.n()) return false;
  Eigen::JacobiSVD<Matrix> svd(spec.coupling);
  const auto& sv = svd.singularValues();
  return sv.size() > 0 && sv(0) > 0.0 && sv(sv.size() - 1) / sv(0) >= kSingularRcond;
}

Matrix recover_ccr(const Matrix& drift, const Matrix& mho) {
  require_hurwitz(drift);
  Matrix theta = solve_lyapunov(drift, mho);
  if (asymmetry(theta, -1.0) > 1e-8)
    fail(ErrorCode::LyapunovSolveFailed, "recovered CCR matrix is not antisymmetric");
  return theta;
}

GaussianStateData solve_state_ale(const Matrix& drift, const Matrix& dispersion) {
  require_hurwitz(drift);
  Matrix p0 = solve_lyapunov(drift, dispersion * dispersion.transpose());
  return {0.5 * (p0 + p0.transpose())};
}

OscillatorSpec transform_system(const OscillatorSpec& spec, const Matrix& s) {
  if (s.rows() != spec.n() || s.cols() != spec.n())
    fail(ErrorCode::InvalidArgument, "S must be n x n");
  if (is_singular(s)) fail(ErrorCode::SingularS, "transformation matrix is singular");
  const Matrix s_inv = s.inverse();
  OscillatorSpec out = spec;
  out.ccr = s * spec.ccr * s.transpose();
  out.energy = s_inv.transpose() * spec.energy * s_inv;
  out.coupling = spec.coupling * s_inv;
  return out;
}

}  // namespace qeflab
