#pragma once

#include <vector>

#include "qeflab/eigensolver.hpp"

namespace qeflab {

/// tanh(z)/z, continuous at zero.
double tanhc(double z);

/// QKL coefficient functions h_k = [φ_k ψ_k], their scaled running integrals
/// H_k(t) = √2∫_0^t h_k, and the weights tanhc(θω_k) of the surrogate
/// covariance operator K.
struct QklBasis {
  SpectralBasis basis;
  double theta = 0.0;
  Vector tanc_values;               // tanhc(θω_k), one per retained pair
  std::vector<Matrix> cum_phi;      // √2∫φ_k at grid nodes, n×N
  std::vector<Matrix> cum_psi;      // √2∫ψ_k at grid nodes, n×N

  std::size_t modes() const { return basis.pairs.size(); }
  const Grid& grid() const { return basis.grid; }
  int dim() const { return basis.pairs.empty() ? 0 : static_cast<int>(basis.pairs.front().phi.rows()); }

  /// H_k(t), n×2, at any t ∈ [0, T].
  Matrix cumulative(std::size_t k, double t) const;
  /// H_k at grid node a, n×2.
  Matrix cumulative_at_node(std::size_t k, Eigen::Index a) const;
};

QklBasis build_qkl(const SpectralBasis& basis, double theta);

/// Σ_k tanhc(θω_k) H_k(s)H_k(t)ᵀ over retained modes: the covariance of the
/// truncated surrogate process Z.
Matrix surrogate_covariance(const QklBasis& qkl, double s, double t);

/// Σ_k H_k(s)H_k(t)ᵀ over retained modes (tends to min(s,t)I).
Matrix wiener_covariance(const QklBasis& qkl, double s, double t);

/// Truncated K(f) = Σ_k 2·tanhc(θω_k)·h_k⟨h_k, f⟩ for a real grid function f
/// (n×N): the covariance operator of the increments of the truncated Z.
/// The orthogonal complement of the retained modes is annihilated.
Matrix apply_K(const QklBasis& qkl, const Matrix& f);

/// Grid inner product ⟨f, g⟩ = Σ_a w_a f_aᵀ g_a.
double grid_inner(const Grid& grid, const Matrix& f, const Matrix& g);

/// Σ_ab w_a w_b ‖Σ_k H_k(s_a)H_k(s_b)ᵀ − min(s_a, s_b)I‖_F².
double wiener_residual(const QklBasis& qkl);

/// Trace of the unretained part of the Wiener covariance operator:
/// nT²/2 − Σ_k ∫‖H_k‖_F². Its square bounds wiener_residual.
double wiener_trace_tail(const QklBasis& qkl);

}  // namespace qeflab
