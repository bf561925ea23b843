#pragma once

#include "qeflab/linalg.hpp"

namespace qeflab {

/// Physical data of a multimode open quantum harmonic oscillator.
///
/// The n system variables obey [X, Xᵀ] = 2iΘ; the Hamiltonian is ½XᵀRX and
/// the m field-coupling operators are MX.
struct OscillatorSpec {
  Matrix ccr;       // Θ, n×n antisymmetric, nonsingular
  Matrix energy;    // R, n×n symmetric
  Matrix coupling;  // M, m×n
  double horizon = 1.0;           // T
  double risk_sensitivity = 1.0;  // θ

  int n() const { return static_cast<int>(ccr.rows()); }
  int m() const { return static_cast<int>(coupling.rows()); }
};

struct SystemMatrices {
  Matrix drift;       // A = 2Θ(R + MᵀJM)
  Matrix dispersion;  // B = 2ΘMᵀ
  Matrix mho;         // ℧ = BJBᵀ
  Matrix field_j;     // J = bJ ⊗ I_{m/2}
  double pr_residual = 0.0;  // ‖AΘ + ΘAᵀ + ℧‖_F
  double max_real_eigenvalue = 0.0;
  bool hurwitz = false;
  bool mho_singular = true;
};

struct GaussianStateData {
  Matrix p0;  // one-point covariance, AP₀ + P₀Aᵀ + BBᵀ = 0
};

/// Margin on max Re λ(A) used by the Hurwitz flag.
inline constexpr double kHurwitzMargin = 1e-10;

/// Checks dimensions, symmetry of R, antisymmetry and nonsingularity of Θ.
void validate(const OscillatorSpec& spec);

/// Derives A, B, ℧. A non-Hurwitz A and a singular ℧ are reported through
/// flags rather than thrown, so the result can still be inspected.
SystemMatrices build_system(const OscillatorSpec& spec);

/// True when M has full column rank (necessary for det(MᵀJM) ≠ 0).
bool coupling_full_rank(const OscillatorSpec& spec);

/// Solves AΘ̂ + Θ̂Aᵀ + ℧ = 0 for Hurwitz A.
Matrix recover_ccr(const Matrix& drift, const Matrix& mho);

/// Invariant one-point covariance under vacuum input fields.
GaussianStateData solve_state_ale(const Matrix& drift, const Matrix& dispersion);

/// Applies X ↦ SX: Θ → SΘSᵀ, R → S⁻ᵀRS⁻¹, M → MS⁻¹.
OscillatorSpec transform_system(const OscillatorSpec& spec, const Matrix& s);

double max_real_eigenvalue(const Matrix& x);

}  // namespace qeflab
