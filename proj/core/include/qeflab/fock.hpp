#pragma once

#include <vector>

#include "qeflab/linalg.hpp"

namespace qeflab {

/// Position and momentum of one mode in the first N number states.
struct TruncatedPair {
  int dim = 0;
  CMatrix xi;   // (a + a†)/√2
  CMatrix eta;  // (a − a†)/(i√2)
  double ccr_residual = 0.0;  // max |[ξ,η] − iI| on the leading (N−1)-block
};

TruncatedPair build_pair(int n);

/// Leading ⌊N/2⌋ block, where truncation has not propagated.
CMatrix corner(const CMatrix& x);

/// Relative corner distance max|x − y| / max|y| over corner blocks.
double corner_error(const CMatrix& x, const CMatrix& y);

/// e^{ω(ξ² + η²)}.
CMatrix lhs_exponential(const TruncatedPair& pair, double omega);

double sigma_of_omega(double omega);  // √(2 tanh ω), ω ≥ 0
double omega_of_sigma(double sigma);  // artanh(σ²/2), 0 ≤ σ < √2

struct FockQuadrature {
  int order = 40;
  double tolerance = 1e-8;  // allowed relative corner change from order to order + 8
  bool check = true;
};

/// E e^{σ(αξ + βη)} for independent standard normal α, β, by tensor
/// Gauss–Hermite quadrature (probabilists' weights).
CMatrix gaussian_average(const TruncatedPair& pair, double sigma, int order);

/// (1/cosh ω)·E e^{σ(αξ + βη)} with σ = √(2 tanh ω). Throws
/// QuadratureUnderresolved when the check is on and the corner block moves
/// by more than the tolerance between orders q and q + 8.
CMatrix rhs_average(const TruncatedPair& pair, double omega, const FockQuadrature& quad = {});

/// Corner distance between e^{σ(aξ+bη)} and e^{σaξ}e^{σbη}e^{−iσ²ab/2}.
double bch_residual(const TruncatedPair& pair, double sigma, double a, double b);

struct OdeReport {
  std::vector<double> sigmas;
  std::vector<double> residuals;  // relative corner residual per σ
  double step = 0.0;
  double max_residual = 0.0;
};

/// Central-difference check of f′ = σ/(1 − σ⁴/4)·(ξ² + η² + σ²/2)·f for
/// f(σ) = E e^{σ(αξ + βη)}, σ ∈ [0, √2). The truncation edge reaches the
/// corner block once σ grows past roughly 0.8 at N = 40; larger σ needs a
/// larger N.
OdeReport verify_ode(const TruncatedPair& pair, const std::vector<double>& sigmas, double step,
                     int order = 40);

}  // namespace qeflab
