#include "qeflab/qkl.hpp"

#include <cmath>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

}  // namespace

double tanhc(double z) {
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    return 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0;
  }
  return std::tanh(z) / z;
}

Matrix QklBasis::cumulative(std::size_t k, double t) const {
  const CVector v = kSqrt2 * basis.pairs.at(k).integral(t);
  Matrix h(v.size(), 2);
  h.col(0) = v.real();
  h.col(1) = v.imag();
  return h;
}

Matrix QklBasis::cumulative_at_node(std::size_t k, Eigen::Index a) const {
  Matrix h(cum_phi[k].rows(), 2);
  h.col(0) = cum_phi[k].col(a);
  h.col(1) = cum_psi[k].col(a);
  return h;
}

QklBasis build_qkl(const SpectralBasis& basis, double theta) {
  if (theta < 0.0) fail(ErrorCode::InvalidArgument, "theta must be nonnegative");
  QklBasis q;
  q.basis = basis;
  q.theta = theta;
  const std::size_t modes = basis.pairs.size();
  q.tanc_values.resize(static_cast<Eigen::Index>(modes));
  for (std::size_t k = 0; k < modes; ++k) {
    const EigenPair& p = basis.pairs[k];
    q.tanc_values(static_cast<Eigen::Index>(k)) = tanhc(theta * p.omega);
    Matrix cphi(p.phi.rows(), basis.grid.size());
    Matrix cpsi(p.phi.rows(), basis.grid.size());
    for (Eigen::Index a = 0; a < basis.grid.size(); ++a) {
      const CVector v = kSqrt2 * p.integral(basis.grid.nodes(a));
      cphi.col(a) = v.real();
      cpsi.col(a) = v.imag();
    }
    q.cum_phi.push_back(std::move(cphi));
    q.cum_psi.push_back(std::move(cpsi));
  }
  return q;
}

Matrix surrogate_covariance(const QklBasis& qkl, double s, double t) {
  const int n = qkl.dim();
  Matrix c = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < qkl.modes(); ++k)
    c += qkl.tanc_values(static_cast<Eigen::Index>(k)) * qkl.cumulative(k, s) *
         qkl.cumulative(k, t).transpose();
  return c;
}

Matrix wiener_covariance(const QklBasis& qkl, double s, double t) {
  const int n = qkl.dim();
  Matrix c = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < qkl.modes(); ++k)
    c += qkl.cumulative(k, s) * qkl.cumulative(k, t).transpose();
  return c;
}

double grid_inner(const Grid& grid, const Matrix& f, const Matrix& g) {
  return (f.cwiseProduct(g).colwise().sum().transpose().array() * grid.weights.array()).sum();
}

Matrix apply_K(const QklBasis& qkl, const Matrix& f) {
  const Grid& grid = qkl.grid();
  if (f.cols() != grid.size() || f.rows() != qkl.dim())
    fail(ErrorCode::GridMismatch, "grid function must be n x (number of grid nodes)");
  Matrix out = Matrix::Zero(f.rows(), f.cols());
  for (std::size_t k = 0; k < qkl.modes(); ++k) {
    const EigenPair& p = qkl.basis.pairs[k];
    const double weight = 2.0 * qkl.tanc_values(static_cast<Eigen::Index>(k));
    out += weight * grid_inner(grid, p.phi, f) * p.phi;
    out += weight * grid_inner(grid, p.psi, f) * p.psi;
  }
  return out;
}

double wiener_residual(const QklBasis& qkl) {
  const Grid& grid = qkl.grid();
  const int n = qkl.dim();
  const Eigen::Index count = grid.size();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < count; ++a) {
    for (Eigen::Index b = 0; b < count; ++b) {
      Matrix r = -std::min(grid.nodes(a), grid.nodes(b)) * Matrix::Identity(n, n);
      for (std::size_t k = 0; k < qkl.modes(); ++k)
        r += qkl.cumulative_at_node(k, a) * qkl.cumulative_at_node(k, b).transpose();
      acc += grid.weights(a) * grid.weights(b) * r.squaredNorm();
    }
  }
  return acc;
}

double wiener_trace_tail(const QklBasis& qkl) {
  const Grid& grid = qkl.grid();
  double captured = 0.0;
  for (std::size_t k = 0; k < qkl.modes(); ++k)
    for (Eigen::Index a = 0; a < grid.size(); ++a)
      captured += grid.weights(a) * (qkl.cum_phi[k].col(a).squaredNorm() + qkl.cum_psi[k].col(a).squaredNorm());
  const double total = 0.5 * qkl.dim() * grid.horizon * grid.horizon;
  return total - captured;
}

}  // namespace qeflab
