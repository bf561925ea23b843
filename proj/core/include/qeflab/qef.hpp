#pragma once

#include <optional>

#include "qeflab/eigensolver.hpp"
#include "qeflab/model.hpp"

namespace qeflab {

struct CTerm {
  double value = 0.0;  // Σ_k ln cosh(θω_k) over retained modes
  double tail = 0.0;   // bound on the unretained remainder via ln cosh x ≤ x²/2
};

CTerm compute_C(const SpectralBasis& basis, double theta);

/// Grid discretisation shared by every θ.
///
/// P̃ = W^{1/2}[P(s_a − s_b)]W^{1/2} is the symmetrised covariance operator.
/// K = tanc(θL) is represented through the spectrum of the weighted kernel
/// Λ̃ = W^{1/2}[Λ(s_a − s_b)]W^{1/2}: −Λ̃² = V diag(ω̃²) Vᵀ, so
/// K̃ = V diag(tanhc(θω̃)) Vᵀ with every frequency appearing twice.
class QefOperators {
 public:
  QefOperators(const KernelContext& ctx, const SpectralBasis& basis, const GaussianStateData& state);

  const SpectralBasis& basis() const { return basis_; }
  const Matrix& p_weighted() const { return p_weighted_; }
  const Matrix& spectral_vectors() const { return vectors_; }
  const Vector& spectral_omegas() const { return omegas_; }  // descending
  const Vector& sqrt_weights() const { return sqrt_weights_; }
  int dim() const { return dim_; }

  /// tanhc(θω̃) per spectral vector.
  Vector k_weights(double theta) const;
  Matrix k_weighted(double theta) const;
  Matrix sqrt_k_weighted(double theta) const;

  /// Eigenvalues of √K P √K (isospectral to PK), descending, negatives above
  /// −1e-10·λ_max clipped to zero. Throws NegativeEigenvalue otherwise.
  Vector pk_eigenvalues(double theta) const;
  /// Eigenvalues of P̃ alone (K = I), descending.
  const Vector& p_eigenvalues() const { return p_eigs_; }
  double trace_pk(double theta) const;

  /// ½Σ ln cosh(θω̃) over the discrete frequencies below the retained modes.
  double c_remainder(double theta) const;

  /// lim θ·r(PK_θ) as θ → ∞, that is r(|L̃|^{-1/2} P̃ |L̃|^{-1/2}).
  double saturation() const;

  /// Smallest θ with θ·r(PK_θ) ≥ 1; θ·r(PK_θ) is nondecreasing in θ.
  /// +∞ when the saturation limit does not exceed 1 (minimum-uncertainty
  /// states, where P and L share eigenfunctions with equal magnitudes).
  double theta_critical() const;

 private:
  SpectralBasis basis_;
  int dim_ = 0;
  Matrix p_weighted_;
  Matrix vectors_;
  Vector omegas_;
  Vector sqrt_weights_;
  Vector p_eigs_;
  mutable std::optional<double> theta_critical_;
};

/// Eigenvalues λ_k of PK at risk parameter θ.
Vector pk_eigenvalues(const QefOperators& ops, double theta);

struct QefReport {
  double theta = 0.0;
  double c = 0.0;       // retained Σ ln cosh(θω_k) plus the discrete remainder
  double tail_c = 0.0;  // bound on the remainder, θ²/2 · hs_tail/2
  Vector lambdas;
  double spectral_radius = 0.0;
  double theta_critical = 0.0;
  std::optional<double> xi;            // empty when θ·r(PK) ≥ 1
  std::optional<double> xi_classical;  // empty when θ·r(P) ≥ 1
  double trace_tail = 0.0;  // Σ λ_k beyond the leading 2·(retained modes)
  double capture = 0.0;

  bool diverged() const { return !xi.has_value(); }
};

struct QefOptions {
  bool classical = false;  // force L = 0: K = I and C = 0
};

/// Ξ = exp(−C) Π_k (1 − θλ_k)^{−1/2}, accumulated in log form.
QefReport compute_qef(const QefOperators& ops, double theta, const QefOptions& opts = {});

/// Throws ThetaSupercritical (naming θ*) when θ·r(PK) ≥ 1.
double compute_qef_value(const QefOperators& ops, double theta);

}  // namespace qeflab
