#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qeflab/qef.hpp"
#include "qeflab/qkl.hpp"

namespace qeflab {

struct McConfig {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t batch = 1000;
  unsigned threads = 1;
};

enum class McRoute { Z, N };

std::string to_string(McRoute route);

struct McEstimate {
  McRoute route = McRoute::Z;
  double theta = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n_eff = 0;
  double diverged_fraction = 0.0;
  double kurtosis = 0.0;  // excess kurtosis of the batch means
  bool second_moment_finite = true;  // 2θ·r(PK) < 1
  bool unreliable = false;
  std::uint64_t seed = 0;
  double capture = 0.0;
};

/// Excess kurtosis of the batch means above which an estimate is flagged.
inline constexpr double kKurtosisGuard = 6.0;

/// Paths of the truncated surrogate Z(t) = Σ_k √tanhc(θω_k) H_k(t)[α_k; β_k]
/// at t = 0 followed by the grid nodes, n×(N+1) each. With unit_weights the
/// tanhc factors are replaced by one (the Wiener limit).
std::vector<Matrix> sample_Z_paths(const QklBasis& qkl, std::size_t count, std::uint64_t seed,
                                   bool unit_weights = false);

/// Paths of the stationary Gaussian process N at the grid nodes, n×N each,
/// through a PSD square root of [P(s_a − s_b)]. Throws CovarianceNotPSD.
std::vector<Matrix> sample_N_paths(const KernelContext& ctx, const Matrix& p0, const Grid& grid,
                                   std::size_t count, std::uint64_t seed);

/// Both Monte-Carlo estimates of Ξ at θ, Z-route first.
///
/// Z-route: exp(−C)·E exp((θ/2)∬dZᵀP dZ), with the increments of Z drawn
/// in every discrete mode of L with variance tanhc(θω̃).
/// N-route: exp(−C)·E exp((θ/2)⟨N, K N⟩).
/// The second moment is infinite once 2θ·r(PK) ≥ 1; such estimates are
/// flagged unreliable, as is everything above θ*/2.
/// Standard errors come from batch means. Throws ThetaSupercritical for
/// θ ≥ θ* and OverflowDominated when more than 1% of exponents exceed 700.
std::vector<McEstimate> estimate_qef_mc(const QefOperators& ops, double theta, const McConfig& cfg);

McEstimate estimate_qef_mc(const QefOperators& ops, double theta, const McConfig& cfg, McRoute route);

}  // namespace qeflab
