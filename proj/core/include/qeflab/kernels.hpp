#pragma once

#include "qeflab/linalg.hpp"
#include "qeflab/model.hpp"
#include "qeflab/quadrature.hpp"

namespace qeflab {

/// Everything needed to evaluate the commutator kernel Λ and its
/// boundary-value representation. Immutable once built.
///
/// The second-order ODE satisfied by g = L(f) is written as a first-order
/// system in (g, g′) with companion matrix
///   F = [[0, I], [℧Aᵀ℧⁻¹A, A − ℧Aᵀ℧⁻¹]],
/// initial condition (g, g′)(0) = V g(0) with V = [I; −ΘAᵀΘ⁻¹] and terminal
/// condition U (g, g′)(T) = 0 with U = [A, −I].
class KernelContext {
 public:
  /// Throws SingularMho when ℧ is singular and CouplingRankDeficient when M
  /// lacks full column rank.
  explicit KernelContext(const OscillatorSpec& spec);

  const OscillatorSpec& spec() const { return spec_; }
  const SystemMatrices& system() const { return sys_; }
  const Matrix& ccr() const { return spec_.ccr; }
  const Matrix& drift() const { return sys_.drift; }
  const Matrix& mho() const { return sys_.mho; }
  const Matrix& mho_inv() const { return mho_inv_; }
  const Matrix& ccr_inv() const { return ccr_inv_; }
  const Matrix& companion() const { return f_; }
  const Matrix& terminal() const { return u_; }
  const Matrix& initial() const { return v_; }
  double horizon() const { return spec_.horizon; }
  int dim() const { return spec_.n(); }

 private:
  OscillatorSpec spec_;
  SystemMatrices sys_;
  Matrix mho_inv_;
  Matrix ccr_inv_;
  Matrix f_;
  Matrix u_;
  Matrix v_;
};

/// Λ(s − t): e^{(s−t)A}Θ for s ≥ t, Θe^{(t−s)Aᵀ} otherwise.
Matrix lambda_kernel(const KernelContext& ctx, double s, double t);

/// P(s − t): e^{(s−t)A}P₀ for s ≥ t, P₀e^{(t−s)Aᵀ} otherwise.
Matrix covariance_kernel(const KernelContext& ctx, const Matrix& p0, double s, double t);

/// Dense nN×nN matrix of kernel blocks [Λ(s_a − s_b)] on the grid nodes
/// (no quadrature weights).
Matrix lambda_matrix(const KernelContext& ctx, const Grid& grid);
Matrix covariance_matrix(const KernelContext& ctx, const Matrix& p0, const Grid& grid);

/// g(s_a) = Σ_b w_b Λ(s_a − s_b) f(s_b). `f` is n×N, one column per node.
CMatrix apply_L(const KernelContext& ctx, const Grid& grid, const CMatrix& f);

/// Same operator via g = g₊ + Θg₋ with the one-sided integrals
/// g₊(s) = ∫_0^s Λ(s−t)f(t)dt and g₋(s) = ∫_s^T e^{(t−s)Aᵀ}f(t)dt.
CMatrix apply_L_split(const KernelContext& ctx, const Grid& grid, const CMatrix& f);

struct BvpMatrices {
  CMatrix d;  // D(ω) = F + (i/ω)[[0, 0], [℧, 0]]
  CMatrix e;  // E(ω) = U e^{TD(ω)} V
};

BvpMatrices bvp_matrices(const KernelContext& ctx, double omega);

/// G(T) = U e^{TF} V. Verifies det G(T) = e^{−T tr A} det(−℧Θ⁻¹) to 1e-8
/// relative and throws DeterminantIdentityViolated otherwise.
Matrix green_gram(const KernelContext& ctx, double horizon);

/// Relative mismatch |det G(T) − e^{−T tr A} det(−℧Θ⁻¹)| / |rhs|. For
/// n ≤ 6, det G(T) is read off the n-th exterior power of e^{TF}, which stays
/// accurate when e^{TF} itself is too badly conditioned for an LU.
double green_gram_det_error(const KernelContext& ctx, double horizon);

/// Λ(s − t) evaluated through the Green function of the boundary-value
/// problem on [0, T].
Matrix green_function(const KernelContext& ctx, double s, double t);

/// ∬_{[0,T]²} ‖Λ(s−t)‖_F² ds dt reduced to the smooth one-dimensional
/// integral 2∫_0^T (T − τ)‖e^{τA}Θ‖_F² dτ.
double hs_norm_squared(const KernelContext& ctx);

/// The same double integral by the tensor grid rule (kink on s = t limits it).
double hs_norm_squared_grid(const KernelContext& ctx, const Grid& grid);

}  // namespace qeflab
