#include "qeflab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

Matrix expm(const Matrix& x) { return matrix_exp(x).value; }

Matrix two_sided(const Matrix& drift, const Matrix& at_zero, double tau) {
  if (tau >= 0.0) return expm(tau * drift) * at_zero;
  return at_zero * expm(-tau * drift.transpose());
}

Matrix block_kernel(const Grid& grid, int n, const auto& block) {
  const Eigen::Index count = grid.size();
  Matrix out(n * count, n * count);
  for (Eigen::Index a = 0; a < count; ++a)
    for (Eigen::Index b = 0; b < count; ++b)
      out.block(n * a, n * b, n, n) = block(grid.nodes(a), grid.nodes(b));
  return out;
}

// All k-element subsets of {0, ..., m−1} in lexicographic order.
std::vector<std::vector<int>> subsets(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return out;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// det(U e^{tF} V) for U k×m, V m×k through the k-th exterior power:
// Λᵏ(e^{tF}) = e^{tF⁽ᵏ⁾} with F⁽ᵏ⁾ the additive compound of F. The result is
// carried by the dominant exterior mode, so it survives when e^{tF} mixes
// growing and decaying directions far beyond double-precision range.
double compound_det(const Matrix& u, const Matrix& f, const Matrix& v, double t) {
  const int m = static_cast<int>(f.rows());
  const int k = static_cast<int>(u.rows());
  const auto sets = subsets(m, k);
  const Eigen::Index c = static_cast<Eigen::Index>(sets.size());
  Vector left(c), right(c);
  Matrix gen = Matrix::Zero(c, c);
  Matrix minor(k, k);
  for (Eigen::Index a = 0; a < c; ++a) {
    const auto& s = sets[static_cast<std::size_t>(a)];
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) minor(i, j) = u(i, s[j]);
    left(a) = minor.determinant();
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) minor(i, j) = v(s[i], j);
    right(a) = minor.determinant();
  }
  for (Eigen::Index a = 0; a < c; ++a) {
    const auto& r = sets[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < c; ++b) {
      const auto& q = sets[static_cast<std::size_t>(b)];
      if (a == b) {
        for (int i : r) gen(a, b) += f(i, i);
        continue;
      }
      // Rows r and columns q must differ in exactly one index.
      int only_r = -1, only_q = -1, pos_r = -1, pos_q = -1, misses = 0;
      for (int i = 0; i < k; ++i) {
        if (!std::binary_search(q.begin(), q.end(), r[i])) {
          only_r = r[i];
          pos_r = i;
          ++misses;
        }
        if (!std::binary_search(r.begin(), r.end(), q[i])) {
          only_q = q[i];
          pos_q = i;
        }
      }
      if (misses != 1) continue;
      gen(a, b) = ((pos_r + pos_q) % 2 ? -1.0 : 1.0) * f(only_r, only_q);
    }
  }
  return left.dot(expm(t * gen) * right);
}

// Exterior powers up to this dimension are cheap enough to exponentiate.
constexpr int kMaxCompoundDim = 1000;

long long binomial(int m, int k) {
  long long c = 1;
  for (int i = 1; i <= k; ++i) c = c * (m - k + i) / i;
  return c;
}

void check_grid_function(const KernelContext& ctx, const Grid& grid, const CMatrix& f) {
  if (f.rows() != ctx.dim() || f.cols() != grid.size())
    fail(ErrorCode::GridMismatch, "grid function must be n x (number of grid nodes)");
}

}  // namespace

KernelContext::KernelContext(const OscillatorSpec& spec) : spec_(spec), sys_(build_system(spec)) {
  if (!coupling_full_rank(spec_))
    fail(ErrorCode::CouplingRankDeficient, "coupling matrix M must have full column rank");
  if (sys_.mho_singular) fail(ErrorCode::SingularMho, "BJB^T is singular");
  const int n = spec_.n();
  const Matrix& a = sys_.drift;
  mho_inv_ = sys_.mho.inverse();
  ccr_inv_ = spec_.ccr.inverse();
  const Matrix reflected = sys_.mho * a.transpose() * mho_inv_;
  f_ = Matrix::Zero(2 * n, 2 * n);
  f_.topRightCorner(n, n) = Matrix::Identity(n, n);
  f_.bottomLeftCorner(n, n) = reflected * a;
  f_.bottomRightCorner(n, n) = a - reflected;
  u_.resize(n, 2 * n);
  u_ << a, -Matrix::Identity(n, n);
  v_.resize(2 * n, n);
  v_ << Matrix::Identity(n, n), -spec_.ccr * a.transpose() * ccr_inv_;
}

Matrix lambda_kernel(const KernelContext& ctx, double s, double t) {
  return two_sided(ctx.drift(), ctx.ccr(), s - t);
}

Matrix covariance_kernel(const KernelContext& ctx, const Matrix& p0, double s, double t) {
  return two_sided(ctx.drift(), p0, s - t);
}

Matrix lambda_matrix(const KernelContext& ctx, const Grid& grid) {
  return block_kernel(grid, ctx.dim(), [&](double s, double t) { return lambda_kernel(ctx, s, t); });
}

Matrix covariance_matrix(const KernelContext& ctx, const Matrix& p0, const Grid& grid) {
  return block_kernel(grid, ctx.dim(),
                      [&](double s, double t) { return covariance_kernel(ctx, p0, s, t); });
}

CMatrix apply_L(const KernelContext& ctx, const Grid& grid, const CMatrix& f) {
  check_grid_function(ctx, grid, f);
  const int n = ctx.dim();
  const Eigen::Index count = grid.size();
  CMatrix g = CMatrix::Zero(n, count);
  for (Eigen::Index a = 0; a < count; ++a)
    for (Eigen::Index b = 0; b < count; ++b)
      g.col(a) += grid.weights(b) *
                  (lambda_kernel(ctx, grid.nodes(a), grid.nodes(b)).cast<Complex>() * f.col(b));
  return g;
}

CMatrix apply_L_split(const KernelContext& ctx, const Grid& grid, const CMatrix& f) {
  check_grid_function(ctx, grid, f);
  const int n = ctx.dim();
  const Eigen::Index count = grid.size();
  const Matrix& a = ctx.drift();
  const CMatrix theta = ctx.ccr().cast<Complex>();
  CMatrix g_plus = CMatrix::Zero(n, count);
  CMatrix g_minus = CMatrix::Zero(n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double s = grid.nodes(i);
    for (Eigen::Index j = 0; j < count; ++j) {
      const double t = grid.nodes(j);
      const double w = grid.weights(j);
      if (t <= s)
        g_plus.col(i) += w * ((expm((s - t) * a) * ctx.ccr()).cast<Complex>() * f.col(j));
      else
        g_minus.col(i) += w * (expm((t - s) * a.transpose()).cast<Complex>() * f.col(j));
    }
  }
  return g_plus + theta * g_minus;
}

BvpMatrices bvp_matrices(const KernelContext& ctx, double omega) {
  if (!(omega > 0.0)) fail(ErrorCode::NonpositiveOmega, "eigenfrequency must be positive");
  const int n = ctx.dim();
  BvpMatrices out;
  out.d = ctx.companion().cast<Complex>();
  out.d.bottomLeftCorner(n, n) += Complex(0.0, 1.0 / omega) * ctx.mho().cast<Complex>();
  const CMatrix prop = matrix_exp(CMatrix(ctx.horizon() * out.d)).value;
  out.e = ctx.terminal().cast<Complex>() * prop * ctx.initial().cast<Complex>();
  return out;
}

double green_gram_det_error(const KernelContext& ctx, double horizon) {
  const int n = ctx.dim();
  const Matrix g0 = -ctx.mho() * ctx.ccr_inv();
  const double lhs = binomial(2 * n, n) <= kMaxCompoundDim
                         ? compound_det(ctx.terminal(), ctx.companion(), ctx.initial(), horizon)
                         : Matrix(ctx.terminal() * expm(horizon * ctx.companion()) * ctx.initial()).determinant();
  const double rhs = std::exp(-horizon * ctx.drift().trace()) * g0.determinant();
  return std::abs(lhs - rhs) / std::abs(rhs);
}

Matrix green_gram(const KernelContext& ctx, double horizon) {
  if (horizon < 0.0) fail(ErrorCode::InvalidArgument, "horizon must be nonnegative");
  const double err = green_gram_det_error(ctx, horizon);
  if (!(err <= 1e-8))
    fail(ErrorCode::DeterminantIdentityViolated,
         "det G(T) disagrees with exp(-T tr A) det(-mho Theta^-1) by " + std::to_string(err));
  return ctx.terminal() * expm(horizon * ctx.companion()) * ctx.initial();
}

Matrix green_function(const KernelContext& ctx, double s, double t) {
  const int n = ctx.dim();
  const double horizon = ctx.horizon();
  const Matrix& f = ctx.companion();
  const Matrix g = ctx.terminal() * expm(horizon * f) * ctx.initial();
  Eigen::PartialPivLU<Matrix> lu(g);
  if (rcond(g) < kSingularRcond) fail(ErrorCode::SingularG, "G(T) is singular");
  Matrix forcing = Matrix::Zero(2 * n, n);
  forcing.bottomRows(n) = ctx.mho();
  Matrix core = expm(s * f) * ctx.initial() *
                lu.solve(ctx.terminal() * expm((horizon - t) * f));
  if (t <= s) core -= expm((s - t) * f);
  return (core * forcing).topRows(n);
}

double hs_norm_squared(const KernelContext& ctx) {
  const double horizon = ctx.horizon();
  const Grid g = make_grid(horizon, 16, 20);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double tau = g.nodes(i);
    acc += g.weights(i) * (horizon - tau) * (expm(tau * ctx.drift()) * ctx.ccr()).squaredNorm();
  }
  return 2.0 * acc;
}

double hs_norm_squared_grid(const KernelContext& ctx, const Grid& grid) {
  double acc = 0.0;
  for (Eigen::Index a = 0; a < grid.size(); ++a)
    for (Eigen::Index b = 0; b < grid.size(); ++b)
      acc += grid.weights(a) * grid.weights(b) *
             lambda_kernel(ctx, grid.nodes(a), grid.nodes(b)).squaredNorm();
  return acc;
}

}  // namespace qeflab
