#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qeflab/error.hpp"
#include "qeflab/fock.hpp"

using namespace qeflab;

TEST_CASE("truncated position and momentum") {
  const TruncatedPair p = build_pair(12);
  CHECK(p.dim == 12);
  CHECK(p.ccr_residual < 1e-12);
  CHECK((p.xi - p.xi.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((p.eta - p.eta.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  // ξ² + η² = 2a†a + 1 away from the truncation edge.
  const CMatrix h = p.xi * p.xi + p.eta * p.eta;
  for (int k = 0; k < 11; ++k) CHECK(std::abs(h(k, k) - Complex(2.0 * k + 1.0, 0.0)) < 1e-13);
  CHECK(std::abs(p.xi(0, 1) - Complex(std::sqrt(0.5), 0.0)) < 1e-15);
  CHECK_THROWS_AS(build_pair(3), Error);
  CHECK(corner(p.xi).rows() == 6);
}

TEST_CASE("sigma-omega bijection") {
  for (double w : {1e-6, 0.01, 0.2, 1.0, 3.0}) {
    const double s = sigma_of_omega(w);
    CHECK(s > 0.0);
    CHECK(s < std::sqrt(2.0));
    CHECK(std::abs(omega_of_sigma(s) - w) <= 1e-12 * std::max(1.0, w));
    CHECK(s * s == doctest::Approx(2.0 * std::tanh(w)).epsilon(1e-14));
  }
  // Near σ = √2 the inverse is ill-conditioned: dω/dσ grows like e^{2ω}.
  CHECK(std::abs(omega_of_sigma(sigma_of_omega(10.0)) - 10.0) <= 1e-15 * std::exp(20.0));
  CHECK(sigma_of_omega(0.0) == 0.0);
  CHECK_THROWS_AS(omega_of_sigma(1.5), Error);
}

TEST_CASE("left-hand exponential is diagonal with entries exp(omega(2k+1))") {
  const TruncatedPair p = build_pair(20);
  const CMatrix e = lhs_exponential(p, 0.2);
  for (int k = 0; k < 10; ++k) CHECK(std::abs(e(k, k) - std::exp(0.2 * (2 * k + 1))) < 1e-12 * std::exp(0.2 * (2 * k + 1)));
  CHECK(corner(e).cwiseAbs().maxCoeff() - corner(e).diagonal().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gaussian average: vacuum element and identity at sigma = 0") {
  const TruncatedPair p = build_pair(40);
  const CMatrix one = gaussian_average(p, 0.0, 8);
  CHECK((one - CMatrix::Identity(40, 40)).cwiseAbs().maxCoeff() < 1e-14);
  const double s = 0.5;
  const CMatrix g = gaussian_average(p, s, 40);
  CHECK(std::abs(g(0, 0) - 1.0 / (1.0 - 0.5 * s * s)) < 1e-10);
}

TEST_CASE("quadratic-exponential identity in the truncated Fock space") {
  // Truncation error falls geometrically until rounding takes over near
  // N = 50 (about 1e-12).
  FockQuadrature quad;
  double prev = 1e300;
  for (int n : {10, 20, 30, 40}) {
    const TruncatedPair p = build_pair(n);
    const double err = corner_error(lhs_exponential(p, 0.2), rhs_average(p, 0.2, quad));
    if (n == 40) CHECK(err <= 1e-6);
    CHECK(err < prev);
    prev = err;
  }
  const TruncatedPair p = build_pair(40);
  FockQuadrature coarse;
  coarse.order = 4;
  try {
    rhs_average(p, 0.6, coarse);
    FAIL("expected QuadratureUnderresolved");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuadratureUnderresolved);
  }
  coarse.check = false;
  CHECK_NOTHROW(rhs_average(p, 0.6, coarse));
}

TEST_CASE("BCH factorisation") {
  const TruncatedPair p = build_pair(60);
  for (double a : {-1.0, 0.3, 1.2})
    for (double b : {-0.7, 0.5}) CHECK(bch_residual(p, 0.8, a, b) < 1e-8);
}

TEST_CASE("operator ODE residual decays like h^2") {
  const TruncatedPair p = build_pair(40);
  const std::vector<double> sigmas{0.2, 0.5, 0.8};
  const OdeReport coarse = verify_ode(p, sigmas, 2e-3);
  const OdeReport fine = verify_ode(p, sigmas, 1e-3);
  REQUIRE(coarse.residuals.size() == sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double ratio = coarse.residuals[i] / fine.residuals[i];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
  }
  CHECK(fine.max_residual == doctest::Approx(*std::max_element(fine.residuals.begin(), fine.residuals.end())));
}
