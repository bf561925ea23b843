#pragma once

#include <vector>

#include "qeflab/kernels.hpp"
#include "qeflab/quadrature.hpp"

namespace qeflab {

/// One eigenfunction f = φ + iψ of L with L(f) = iωf, ω > 0, ‖f‖ = 1.
///
/// The function is stored both sampled on the grid and through its
/// propagator, f(t) = [I 0] e^{tD(ω)} y₀, so it can be evaluated (and
/// integrated) anywhere on [0, T].
struct EigenPair {
  double omega = 0.0;
  int multiplicity = 1;
  CMatrix generator;  // D(ω), 2n×2n
  CVector state0;     // y₀ = V f(0), 2n
  Matrix phi;         // Re f on grid nodes, n×N
  Matrix psi;         // Im f on grid nodes, n×N
  double bvp_residual = 0.0;
  double conj_overlap = 0.0;  // |⟨f̄, f⟩|

  CVector value(double t) const;
  CVector integral(double t) const;  // ∫_0^t f(τ)dτ
  CMatrix sampled() const;           // φ + iψ as n×N
};

struct ScanOptions {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int samples = 2000;
};

struct Root {
  double omega = 0.0;
  int multiplicity = 1;
  double det_ratio = 0.0;    // |det E(ω)| / |det G(T)|
  double sigma_ratio = 0.0;  // σ_min / σ_max of E(ω)
};

/// Zeros of det E(ω) in [omega_min, omega_max], descending. Local minima of
/// |det E| on a log-spaced sample are narrowed by golden section and polished
/// by Newton's method on det E; a candidate is kept when
/// |det E|/|det G(T)| ≤ 1e-8 or when Newton has converged onto a point where
/// E is numerically rank deficient. Throws NoRootsFound for an empty band.
std::vector<Root> scan_eigenfrequencies(const KernelContext& ctx, const ScanOptions& opts);

/// Degeneracy threshold: singular values of E(ω) below this fraction of σ_max
/// count towards dim ker E(ω).
inline constexpr double kKernelThreshold = 1e-8;

/// Eigenfunctions for a refined root, one per kernel vector, normalised and
/// (for multiplicity ≥ 2) orthonormalised. Throws EmptyKernel when E(ω) has
/// no numerical kernel.
std::vector<EigenPair> eigenfunction_from_root(const KernelContext& ctx, const Grid& grid,
                                               double omega, int multiplicity = 0);

/// Modified Gram–Schmidt in the complex L² inner product over functions that
/// share one eigenfrequency. Throws RankCollapse on linear dependence.
std::vector<EigenPair> orthonormalize(const std::vector<EigenPair>& pairs, const Grid& grid);

struct NystromResult {
  Vector eigenvalues;  // all nN eigenvalues of −i[√w_a Λ(s_a−s_b) √w_b], descending
  CMatrix vectors;     // matching eigenvectors in weighted coordinates
  Vector positive() const;
};

NystromResult nystrom_oracle(const KernelContext& ctx, const Grid& grid);

struct SpectralBasis {
  std::vector<EigenPair> pairs;  // ω descending
  Grid grid;
  double hs_total = 0.0;
  double hs_captured = 0.0;

  double capture() const { return hs_captured / hs_total; }
  double hs_tail() const { return std::max(0.0, hs_total - hs_captured); }
};

struct BasisOptions {
  ScanOptions scan;
  double capture_fraction = 0.99;
};

/// Default frequency band: ω₁ ≤ sqrt(‖L‖²_HS / 2) bounds the top, and the
/// bottom is two decades lower.
ScanOptions default_scan(const KernelContext& ctx);

/// Retains modes, largest ω first, until 2Σω_k² ≥ capture·‖L‖²_HS.
/// Throws CaptureUnreachable when the band runs out first.
SpectralBasis build_basis(const KernelContext& ctx, const Grid& grid, const BasisOptions& opts);

/// Σ_ab w_a w_b ‖Λ(s_a − s_b) − 2Σ_k ω_k h_k(s_a) bJ h_k(s_b)ᵀ‖_F².
double mercer_residual(const KernelContext& ctx, const SpectralBasis& basis);

/// ∫ h_jᵀ h_k dt on the grid, 2×2.
Matrix basis_gram(const EigenPair& a, const EigenPair& b, const Grid& grid);

}  // namespace qeflab
