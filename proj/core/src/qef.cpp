#include "qeflab/qef.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"
#include "qeflab/kernels.hpp"
#include "qeflab/qkl.hpp"

namespace qeflab {
namespace {

constexpr double kNegativeClip = 1e-10;
constexpr double kSaturationSlack = 1e-6;

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

Vector clipped_descending(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  Vector ev = eig.eigenvalues().reverse();
  if (ev.size() == 0) return ev;
  const double top = std::max(ev(0), 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -kNegativeClip * std::max(top, 1e-300)) {
        std::ostringstream os;
        os << "eigenvalue " << ev(i) << " against lambda_max " << top
           << "; refine the grid";
        fail(ErrorCode::NegativeEigenvalue, os.str());
      }
      ev(i) = 0.0;
    }
  }
  return ev;
}

double log_product(const Vector& lambdas, double theta) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) acc += std::log1p(-theta * lambdas(i));
  return -0.5 * acc;
}

}  // namespace

CTerm compute_C(const SpectralBasis& basis, double theta) {
  CTerm c;
  for (const EigenPair& p : basis.pairs) c.value += log_cosh(theta * p.omega);
  c.tail = 0.5 * theta * theta * 0.5 * basis.hs_tail();
  return c;
}

QefOperators::QefOperators(const KernelContext& ctx, const SpectralBasis& basis,
                           const GaussianStateData& state)
    : basis_(basis), dim_(ctx.dim()) {
  if (state.p0.rows() != ctx.dim() || state.p0.cols() != ctx.dim())
    fail(ErrorCode::StateUnavailable, "Gaussian state covariance P0 is missing or misshapen");
  const Grid& grid = basis_.grid;
  const Eigen::Index count = grid.size();
  sqrt_weights_.resize(dim_ * count);
  for (Eigen::Index a = 0; a < count; ++a)
    sqrt_weights_.segment(dim_ * a, dim_).setConstant(std::sqrt(grid.weights(a)));
  const auto sw = sqrt_weights_.asDiagonal();
  p_weighted_ = sw * covariance_matrix(ctx, state.p0, grid) * sw;
  p_weighted_ = 0.5 * (p_weighted_ + p_weighted_.transpose()).eval();
  p_eigs_ = clipped_descending(p_weighted_);

  const Matrix lam = sw * lambda_matrix(ctx, grid) * sw;
  Matrix sq = lam.transpose() * lam;
  sq = 0.5 * (sq + sq.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sq);
  omegas_ = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
  vectors_ = eig.eigenvectors().rowwise().reverse();
}

Vector QefOperators::k_weights(double theta) const {
  Vector w(omegas_.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = tanhc(theta * omegas_(i));
  return w;
}

Matrix QefOperators::k_weighted(double theta) const {
  return vectors_ * k_weights(theta).asDiagonal() * vectors_.transpose();
}

Matrix QefOperators::sqrt_k_weighted(double theta) const {
  return vectors_ * k_weights(theta).cwiseSqrt().asDiagonal() * vectors_.transpose();
}

Vector QefOperators::pk_eigenvalues(double theta) const {
  const Matrix root = sqrt_k_weighted(theta);
  return clipped_descending(root * p_weighted_ * root);
}

double QefOperators::trace_pk(double theta) const {
  return (p_weighted_.cwiseProduct(k_weighted(theta))).sum();
}

double QefOperators::c_remainder(double theta) const {
  double acc = 0.0;
  for (Eigen::Index i = 2 * static_cast<Eigen::Index>(basis_.pairs.size()); i < omegas_.size(); ++i)
    acc += log_cosh(theta * omegas_(i));
  return 0.5 * acc;
}

double QefOperators::saturation() const {
  if (omegas_.size() == 0) return 0.0;
  if (!(omegas_(omegas_.size() - 1) > 1e-13 * omegas_(0))) return std::numeric_limits<double>::infinity();
  const Matrix d = vectors_ * omegas_.cwiseInverse().cwiseSqrt().asDiagonal() * vectors_.transpose();
  return clipped_descending(d * p_weighted_ * d)(0);
}

double QefOperators::theta_critical() const {
  if (theta_critical_) return *theta_critical_;
  const double inf = std::numeric_limits<double>::infinity();
  if (!(p_eigs_.size() > 0 && p_eigs_(0) > 0.0) || saturation() <= 1.0 + kSaturationSlack) {
    theta_critical_ = inf;
    return inf;
  }
  auto excess = [&](double theta) { return theta * pk_eigenvalues(theta)(0) - 1.0; };
  // K ⪯ I gives θ·r(PK) ≤ θ·r(P), so the classical threshold is a lower bound.
  double lo = 1.0 / p_eigs_(0);
  double hi = 2.0 * lo;
  int doublings = 0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      theta_critical_ = inf;
      return inf;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  theta_critical_ = hi;
  return hi;
}

Vector pk_eigenvalues(const QefOperators& ops, double theta) { return ops.pk_eigenvalues(theta); }

QefReport compute_qef(const QefOperators& ops, double theta, const QefOptions& opts) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) fail(ErrorCode::InvalidArgument, "theta must be finite and >= 0");
  QefReport r;
  r.theta = theta;
  r.capture = ops.basis().capture();
  if (!opts.classical) {
    const CTerm c = compute_C(ops.basis(), theta);
    r.c = c.value + ops.c_remainder(theta);
    r.tail_c = c.tail;
  }
  r.lambdas = opts.classical ? ops.p_eigenvalues() : ops.pk_eigenvalues(theta);
  r.spectral_radius = r.lambdas.size() ? r.lambdas(0) : 0.0;
  r.theta_critical = ops.theta_critical();
  const Eigen::Index lead = std::min<Eigen::Index>(2 * static_cast<Eigen::Index>(ops.basis().pairs.size()),
                                                   r.lambdas.size());
  r.trace_tail = r.lambdas.tail(r.lambdas.size() - lead).sum();
  if (theta * r.spectral_radius < 1.0) r.xi = std::exp(-r.c + log_product(r.lambdas, theta));
  const Vector& mu = ops.p_eigenvalues();
  if (mu.size() == 0 || theta * mu(0) < 1.0) r.xi_classical = std::exp(log_product(mu, theta));
  return r;
}

double compute_qef_value(const QefOperators& ops, double theta) {
  const QefReport r = compute_qef(ops, theta);
  if (!r.xi) {
    std::ostringstream os;
    os.precision(17);
    os << "theta " << theta << " is at or above theta_critical " << r.theta_critical;
    fail(ErrorCode::ThetaSupercritical, os.str());
  }
  return *r.xi;
}

}  // namespace qeflab
