#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "basis_cache.hpp"
#include "oracles.hpp"
#include "qeflab/error.hpp"
#include "qeflab/qef.hpp"
#include "qeflab/qkl.hpp"

using namespace qeflab;

namespace {

struct Setup {
  BasisCache cache;
  QefOperators ops;
  explicit Setup(const OscillatorSpec& spec) : cache(spec), ops(cache.ctx, cache.basis, cache.state) {}
};

const Setup& fixture_setup() {
  static const Setup s(oracle::fixture());
  return s;
}

const Setup& squeezed_setup() {
  static const Setup s(oracle::squeezed_fixture());
  return s;
}

// W^{1/2}[P(s_a − s_b)]W^{1/2} from the Taylor exponential and the
// Kronecker Lyapunov solve.
Matrix oracle_p_weighted(const OscillatorSpec& spec, const Grid& grid) {
  const Matrix a = oracle::drift(spec);
  const Matrix b = oracle::dispersion(spec);
  const Matrix p0 = oracle::lyapunov_kron(a, b * b.transpose());
  const int n = spec.n();
  const Eigen::Index count = grid.size();
  Matrix p(n * count, n * count);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < count; ++j) {
      const double tau = grid.nodes(i) - grid.nodes(j);
      const Matrix blk = tau >= 0.0 ? Matrix(oracle::expm(tau * a) * p0)
                                    : Matrix(p0 * oracle::expm(-tau * a.transpose()));
      p.block(n * i, n * j, n, n) = std::sqrt(grid.weights(i) * grid.weights(j)) * blk;
    }
  return p;
}

}  // namespace

TEST_CASE("fixture: vacuum QEF is exp(theta T)") {
  const Setup& s = fixture_setup();
  CHECK(std::isinf(s.ops.theta_critical()));
  CHECK(s.ops.saturation() <= 1.0 + 1e-6);
  for (double theta : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    const QefReport r = compute_qef(s.ops, theta);
    REQUIRE(r.xi.has_value());
    CHECK(std::log(*r.xi) == doctest::Approx(theta).epsilon(1e-4).scale(1.0));
    CHECK(theta * r.spectral_radius < 1.0);
  }
  CHECK(compute_qef_value(s.ops, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("C term against a direct sum") {
  const Setup& s = fixture_setup();
  for (double theta : {0.0, 0.3, 3.0}) {
    const CTerm c = compute_C(s.cache.basis, theta);
    double direct = 0.0;
    for (const EigenPair& p : s.cache.basis.pairs) direct += std::log(std::cosh(theta * p.omega));
    CHECK(c.value == doctest::Approx(direct).epsilon(1e-13));
    CHECK(c.tail == doctest::Approx(0.25 * theta * theta * s.cache.basis.hs_tail()).epsilon(1e-13));
    CHECK(s.ops.c_remainder(theta) >= 0.0);
    CHECK(s.ops.c_remainder(theta) <= c.tail + 1e-4 * theta * theta);
  }
  // ln cosh stays finite where cosh overflows.
  CHECK(std::isfinite(compute_C(s.cache.basis, 2000.0).value));
}

TEST_CASE("PK eigenvalues: trace identity, bounds, monotone saturation") {
  for (const Setup* s : {&fixture_setup(), &squeezed_setup()}) {
    double prev = 0.0;
    for (double theta : {0.0, 0.5, 1.0, 1.3, 3.0}) {
      const Vector lam = pk_eigenvalues(s->ops, theta);
      CHECK(lam.sum() == doctest::Approx(s->ops.trace_pk(theta)).epsilon(1e-6));
      const Matrix k = s->ops.k_weighted(theta);
      CHECK(lam.sum() == doctest::Approx((k * s->ops.p_weighted()).trace()).epsilon(1e-6));
      CHECK(lam.minCoeff() >= 0.0);
      for (Eigen::Index i = 1; i < lam.size(); ++i) CHECK(lam(i) <= lam(i - 1));
      // K ⪯ I, so PK cannot exceed P in spectral radius.
      CHECK(lam(0) <= s->ops.p_eigenvalues()(0) * (1.0 + 1e-10));
      const double sat = theta * lam(0);
      CHECK(sat >= prev - 1e-12);
      prev = sat;
      const Vector w = s->ops.k_weights(theta);
      CHECK(w.maxCoeff() <= 1.0);
      CHECK(w.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("classical limit matches det(I - theta P)^(-1/2)") {
  for (const Setup* s : {&fixture_setup(), &squeezed_setup()}) {
    const Matrix p = oracle_p_weighted(s->cache.ctx.spec(), s->cache.grid);
    CHECK(oracle::max_abs(p - s->ops.p_weighted()) < 1e-12);
    for (double theta : {0.1, 0.5, 1.0}) {
      const QefReport r = compute_qef(s->ops, theta, QefOptions{true});
      REQUIRE(r.xi.has_value());
      const Matrix m = Matrix::Identity(p.rows(), p.cols()) - theta * p;
      const double expected = std::pow(m.partialPivLu().determinant(), -0.5);
      CHECK(*r.xi == doctest::Approx(expected).epsilon(1e-8));
      CHECK(r.c == 0.0);
      REQUIRE(r.xi_classical.has_value());
      CHECK(*r.xi_classical == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("squeezed state: finite critical parameter and divergence past it") {
  const Setup& s = squeezed_setup();
  const double tc = s.ops.theta_critical();
  REQUIRE(std::isfinite(tc));
  CHECK(s.ops.saturation() > 1.0);
  CHECK(tc * pk_eigenvalues(s.ops, tc)(0) == doctest::Approx(1.0).epsilon(1e-8));
  const QefReport below = compute_qef(s.ops, 0.999 * tc);
  CHECK(below.xi.has_value());
  CHECK(*below.xi > 1.0);
  CHECK(std::isfinite(*below.xi));
  const QefReport above = compute_qef(s.ops, 1.001 * tc);
  CHECK(above.diverged());
  try {
    compute_qef_value(s.ops, 1.001 * tc);
    FAIL("expected ThetaSupercritical");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ThetaSupercritical);
  }
  CHECK(compute_qef(s.ops, 0.5 * tc).theta_critical == tc);
}

TEST_CASE("a zero state gives exp(-C)") {
  const Setup& f = fixture_setup();
  GaussianStateData zero;
  zero.p0 = Matrix::Zero(2, 2);
  const QefOperators ops(f.cache.ctx, f.cache.basis, zero);
  CHECK(std::isinf(ops.theta_critical()));
  const QefReport r = compute_qef(ops, 1.5);
  CHECK(r.lambdas.cwiseAbs().maxCoeff() == 0.0);
  CHECK(*r.xi == doctest::Approx(std::exp(-r.c)).epsilon(1e-14));
  GaussianStateData bad;
  try {
    QefOperators broken(f.cache.ctx, f.cache.basis, bad);
    FAIL("expected StateUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StateUnavailable);
  }
  CHECK_THROWS_AS(compute_qef(f.ops, -1.0), Error);
}

TEST_CASE("random two-mode systems") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2; ++trial) {
    const Setup s(oracle::random_spec(rng, 4));
    const double tc = s.ops.theta_critical();
    const double theta = std::isfinite(tc) ? 0.5 * tc : 1.0;
    const QefReport r = compute_qef(s.ops, theta);
    REQUIRE(r.xi.has_value());
    CHECK(std::isfinite(*r.xi));
    CHECK(r.lambdas.sum() == doctest::Approx(s.ops.trace_pk(theta)).epsilon(1e-6));
    if (std::isfinite(tc)) CHECK(compute_qef(s.ops, 1.001 * tc).diverged());
  }
}
