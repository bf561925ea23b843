#include "qeflab/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 times squared first components of the eigenvectors.
std::pair<Vector, Vector> golub_welsch(const Vector& off_diag, double mu0) {
  const Eigen::Index q = off_diag.size() + 1;
  Matrix jac = Matrix::Zero(q, q);
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    jac(i, i + 1) = off_diag(i);
    jac(i + 1, i) = off_diag(i);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  Vector w = mu0 * eig.eigenvectors().row(0).transpose().array().square();
  return {eig.eigenvalues(), w};
}

}  // namespace

bool Grid::same_as(const Grid& other) const {
  return panels == other.panels && per_panel == other.per_panel &&
         horizon == other.horizon;
}

std::pair<Vector, Vector> gauss_legendre(int q) {
  if (q < 1) fail(ErrorCode::InvalidArgument, "Gauss-Legendre order must be positive");
  Vector beta(q - 1);
  for (int k = 1; k < q; ++k) beta(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  auto [x, w] = golub_welsch(beta, 2.0);
  // Polish nodes with Newton steps on P_q and recompute weights from P_q'.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double t = x(i);
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0;
      double p1 = t;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double p = q == 1 ? t : p1;
      const double pm1 = q == 1 ? 1.0 : p0;
      dp = q * (t * p - pm1) / (t * t - 1.0);
      t -= p / dp;
    }
    x(i) = t;
    w(i) = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

std::pair<Vector, Vector> gauss_hermite_normal(int q) {
  if (q < 1) fail(ErrorCode::InvalidArgument, "Gauss-Hermite order must be positive");
  Vector beta(q - 1);
  for (int k = 1; k < q; ++k) beta(k - 1) = std::sqrt(static_cast<double>(k));
  return golub_welsch(beta, 1.0);
}

Grid make_grid(double horizon, int panels, int per_panel) {
  if (!(horizon > 0.0) || panels < 1 || per_panel < 1)
    fail(ErrorCode::InvalidArgument, "grid needs T > 0, panels >= 1, nodes_per_panel >= 1");
  Grid g;
  g.horizon = horizon;
  g.panels = panels;
  g.per_panel = per_panel;
  const auto [x, w] = gauss_legendre(per_panel);
  const double h = horizon / panels;
  g.nodes.resize(static_cast<Eigen::Index>(panels) * per_panel);
  g.weights.resize(g.nodes.size());
  g.breaks.resize(panels + 1);
  for (int p = 0; p <= panels; ++p) g.breaks(p) = p * h;
  g.breaks(panels) = horizon;
  for (int p = 0; p < panels; ++p) {
    for (int i = 0; i < per_panel; ++i) {
      const Eigen::Index k = static_cast<Eigen::Index>(p) * per_panel + i;
      g.nodes(k) = p * h + 0.5 * h * (x(i) + 1.0);
      g.weights(k) = 0.5 * h * w(i);
    }
  }
  return g;
}

}  // namespace qeflab
