#include "qeflab/fock.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"
#include "qeflab/quadrature.hpp"

namespace qeflab {
namespace {

CMatrix hermitian_exp(const CMatrix& h, double scale) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (h + h.adjoint()));
  const Vector w = (scale * eig.eigenvalues().array()).exp().matrix();
  return eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().adjoint();
}

CMatrix number_sum(const TruncatedPair& pair) { return pair.xi * pair.xi + pair.eta * pair.eta; }

}  // namespace

TruncatedPair build_pair(int n) {
  if (n < 4) fail(ErrorCode::InvalidArgument, "truncation dimension must be at least 4");
  CMatrix a = CMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const double r = 1.0 / std::sqrt(2.0);
  TruncatedPair p;
  p.dim = n;
  p.xi = r * (a + a.adjoint());
  p.eta = Complex(0.0, -r) * (a - a.adjoint());
  const CMatrix comm = p.xi * p.eta - p.eta * p.xi - Complex(0.0, 1.0) * CMatrix::Identity(n, n);
  p.ccr_residual = comm.topLeftCorner(n - 1, n - 1).cwiseAbs().maxCoeff();
  return p;
}

CMatrix corner(const CMatrix& x) {
  const Eigen::Index c = x.rows() / 2;
  return x.topLeftCorner(c, c);
}

double corner_error(const CMatrix& x, const CMatrix& y) {
  const CMatrix cy = corner(y);
  return (corner(x) - cy).cwiseAbs().maxCoeff() / std::max(cy.cwiseAbs().maxCoeff(), 1e-300);
}

CMatrix lhs_exponential(const TruncatedPair& pair, double omega) {
  if (!(omega >= 0.0)) fail(ErrorCode::InvalidArgument, "omega must be nonnegative");
  return hermitian_exp(number_sum(pair), omega);
}

double sigma_of_omega(double omega) {
  if (!(omega >= 0.0)) fail(ErrorCode::InvalidArgument, "omega must be nonnegative");
  return std::sqrt(2.0 * std::tanh(omega));
}

double omega_of_sigma(double sigma) {
  if (!(sigma >= 0.0 && sigma * sigma < 2.0))
    fail(ErrorCode::InvalidArgument, "sigma must lie in [0, sqrt(2))");
  return std::atanh(0.5 * sigma * sigma);
}

CMatrix gaussian_average(const TruncatedPair& pair, double sigma, int order) {
  const auto [x, w] = gauss_hermite_normal(order);
  CMatrix sum = CMatrix::Zero(pair.dim, pair.dim);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < x.size(); ++j)
      sum += (w(i) * w(j)) * hermitian_exp(x(i) * pair.xi + x(j) * pair.eta, sigma);
  return sum;
}

CMatrix rhs_average(const TruncatedPair& pair, double omega, const FockQuadrature& quad) {
  if (!(omega >= 0.0)) fail(ErrorCode::InvalidArgument, "omega must be nonnegative");
  if (quad.order < 1) fail(ErrorCode::InvalidArgument, "quadrature order must be positive");
  const double sigma = sigma_of_omega(omega);
  const CMatrix avg = gaussian_average(pair, sigma, quad.order) / std::cosh(omega);
  if (quad.check) {
    const CMatrix finer = gaussian_average(pair, sigma, quad.order + 8) / std::cosh(omega);
    const double change = corner_error(avg, finer);
    if (change > quad.tolerance) {
      std::ostringstream os;
      os << "order " << quad.order << " moves the corner block by " << change << " relative";
      fail(ErrorCode::QuadratureUnderresolved, os.str());
    }
  }
  return avg;
}

double bch_residual(const TruncatedPair& pair, double sigma, double a, double b) {
  const CMatrix full = hermitian_exp(a * pair.xi + b * pair.eta, sigma);
  const CMatrix split = hermitian_exp(pair.xi, sigma * a) * hermitian_exp(pair.eta, sigma * b) *
                        std::exp(Complex(0.0, -0.5 * sigma * sigma * a * b));
  return corner_error(split, full);
}

OdeReport verify_ode(const TruncatedPair& pair, const std::vector<double>& sigmas, double step,
                     int order) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const CMatrix number = number_sum(pair);
  const CMatrix id = CMatrix::Identity(pair.dim, pair.dim);
  OdeReport r;
  r.step = step;
  for (double s : sigmas) {
    if (!(s >= 0.0) || s + step >= std::sqrt(2.0))
      fail(ErrorCode::InvalidArgument, "sigma must lie in [0, sqrt(2)) with room for the stencil");
    const CMatrix f = gaussian_average(pair, s, order);
    // f is even in σ (α, β → −α, −β), so the stencil may reflect through zero.
    const CMatrix df = (gaussian_average(pair, s + step, order) -
                        gaussian_average(pair, std::abs(s - step), order)) /
                       (2.0 * step);
    const CMatrix rhs = (s / (1.0 - std::pow(s, 4) / 4.0)) * (number + 0.5 * s * s * id) * f;
    const double scale = std::max(corner(f).cwiseAbs().maxCoeff(), 1e-300);
    const double res = (corner(df) - corner(rhs)).cwiseAbs().maxCoeff() / scale;
    r.sigmas.push_back(s);
    r.residuals.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
  }
  return r;
}

}  // namespace qeflab
