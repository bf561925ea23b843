#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qeflab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Rounding-level threshold below which a reciprocal condition number is
/// treated as singular.
inline constexpr double kSingularRcond = 1e-12;

template <typename M>
struct MatrixFunctionResult {
  M value;
  int scaling_squarings = 0;
};

/// e^X by scaling and squaring with a degree-13 Padé approximant.
/// Throws NonFinite for NaN/Inf input.
MatrixFunctionResult<Matrix> matrix_exp(const Matrix& x);
MatrixFunctionResult<CMatrix> matrix_exp(const CMatrix& x);

/// Returns {e^{tX}, ∫_0^t e^{τX} dτ}, both read off one exponential of the
/// block matrix [[X, I], [0, 0]] scaled by t.
std::pair<CMatrix, CMatrix> exp_and_integral(const CMatrix& x, double t);

/// Solves A X + X Aᵀ + Q = 0 for real A, Q by complex Schur reduction and
/// triangular back-substitution. Throws LyapunovSolveFailed when
/// λ_i(A) + conj(λ_j(A)) is numerically zero.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// σ_min / σ_max; zero for an empty or zero matrix.
double rcond(const Matrix& x);
double rcond(const CMatrix& x);

inline bool is_singular(const Matrix& x) { return rcond(x) < kSingularRcond; }

/// Determinant as log|det| and a unit-modulus phase, accumulated from the
/// pivots of a partial-pivot LU so it cannot overflow.
struct LogDet {
  double log_abs = 0.0;
  Complex phase{1.0, 0.0};

  Complex value() const { return phase * std::exp(log_abs); }
};

LogDet log_det(const CMatrix& x);

/// The 2×2 symplectic unit [[0, 1], [-1, 0]].
Matrix symplectic_unit();

/// bJ ⊗ I_{m/2} for even m.
Matrix canonical_j(int m);

/// Symmetric square root of a symmetric positive semi-definite matrix.
/// Eigenvalues in [-clip·λ_max, 0) are clipped to zero; returns false in
/// `ok` when a more negative eigenvalue is met.
Matrix psd_sqrt(const Matrix& x, double clip, bool* ok = nullptr);

inline double relative_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace qeflab
