#include "qeflab/eigensolver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

constexpr double kDetAccept = 1e-8;
constexpr double kResolvable = 1e-12;
constexpr double kDipFactor = 1e-3;
constexpr double kGolden = 0.6180339887498949;

LogDet det_e(const KernelContext& ctx, double omega) {
  return log_det(bvp_matrices(ctx, omega).e);
}

double log_abs_det_e(const KernelContext& ctx, double omega) { return det_e(ctx, omega).log_abs; }

// det E(ω+δ)/det E(ω) without forming either determinant.
Complex det_ratio(const LogDet& num, const LogDet& den) {
  return num.phase / den.phase * std::exp(num.log_abs - den.log_abs);
}

Vector singular_values(const CMatrix& e) {
  Eigen::JacobiSVD<CMatrix> svd(e);
  return svd.singularValues();
}

int kernel_dimension(const Vector& sv) {
  int dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= kKernelThreshold * sv(0)) ++dim;
  return dim;
}

struct Refined {
  double omega = 0.0;
  bool converged = false;
};

Refined golden_then_newton(const KernelContext& ctx, double lo, double hi) {
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = log_abs_det_e(ctx, c);
  double fd = log_abs_det_e(ctx, d);
  for (int it = 0; it < 24; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = log_abs_det_e(ctx, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = log_abs_det_e(ctx, d);
    }
  }
  double omega = 0.5 * (a + b);
  const double span = hi - lo;
  for (int it = 0; it < 60; ++it) {
    const double h = 1e-7 * omega;
    const LogDet mid = det_e(ctx, omega);
    if (!std::isfinite(mid.log_abs)) return {omega, true};
    const Complex up = det_ratio(det_e(ctx, omega + h), mid);
    const Complex down = det_ratio(det_e(ctx, omega - h), mid);
    const Complex step = 2.0 * h / (up - down);
    if (!std::isfinite(step.real())) return {omega, false};
    omega -= step.real();
    if (!(omega > lo - span) || !(omega < hi + span)) return {omega, false};
    if (std::abs(step) <= 1e-13 * omega) return {omega, true};
  }
  return {omega, false};
}

CMatrix sample_function(const CMatrix& generator, const CVector& state0, const Grid& grid, int n) {
  CMatrix f(n, grid.size());
  for (Eigen::Index a = 0; a < grid.size(); ++a)
    f.col(a) = (matrix_exp(CMatrix(grid.nodes(a) * generator)).value * state0).head(n);
  return f;
}

Complex inner(const CMatrix& f, const CMatrix& g, const Grid& grid) {
  Complex acc = 0.0;
  for (Eigen::Index a = 0; a < grid.size(); ++a) acc += grid.weights(a) * f.col(a).dot(g.col(a));
  return acc;
}

// Sup-norm residual of the eigen-BVP, with ODE coefficients assembled from
// A, ℧ directly (not from D), relative to sup |f|.
double bvp_residual(const KernelContext& ctx, const EigenPair& p, const Grid& grid) {
  const int n = ctx.dim();
  const CMatrix a = ctx.drift().cast<Complex>();
  const CMatrix mho = ctx.mho().cast<Complex>();
  const CMatrix refl = (ctx.mho() * ctx.drift().transpose() * ctx.mho_inv()).cast<Complex>();
  const CMatrix left = (ctx.ccr() * ctx.drift().transpose() * ctx.ccr_inv()).cast<Complex>();
  const Complex i_over_omega(0.0, 1.0 / p.omega);
  double scale = 0.0;
  double worst = 0.0;
  auto state_at = [&](double t) { return CVector(matrix_exp(CMatrix(t * p.generator)).value * p.state0); };
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const CVector y = state_at(grid.nodes(k));
    const CVector dy = p.generator * y;
    const CVector f = y.head(n);
    const CVector f1 = y.tail(n);
    const CVector f2 = dy.tail(n);
    const CVector r = f2 + (refl - a) * f1 - refl * a * f - i_over_omega * (mho * f);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
    scale = std::max(scale, f.cwiseAbs().maxCoeff());
  }
  const CVector y0 = state_at(0.0);
  const CVector y_end = state_at(ctx.horizon());
  worst = std::max(worst, (y0.tail(n) + left * y0.head(n)).cwiseAbs().maxCoeff());
  worst = std::max(worst, (y_end.tail(n) - a * y_end.head(n)).cwiseAbs().maxCoeff());
  return worst / std::max(scale, 1e-300);
}

EigenPair make_pair(const KernelContext& ctx, const Grid& grid, double omega, const CMatrix& d,
                    const CVector& f0) {
  const int n = ctx.dim();
  EigenPair p;
  p.omega = omega;
  p.generator = d;
  p.state0 = ctx.initial().cast<Complex>() * f0;
  CMatrix f = sample_function(d, p.state0, grid, n);
  const double norm = std::sqrt(inner(f, f, grid).real());
  if (!(norm > 0.0)) fail(ErrorCode::EmptyKernel, "eigenfunction vanishes on the grid");
  f /= norm;
  p.state0 /= norm;
  p.phi = f.real();
  p.psi = f.imag();
  p.conj_overlap = std::abs(inner(f.conjugate(), f, grid));
  return p;
}

}  // namespace

CVector EigenPair::value(double t) const {
  const Eigen::Index n = state0.size() / 2;
  return (matrix_exp(CMatrix(t * generator)).value * state0).head(n);
}

CVector EigenPair::integral(double t) const {
  const Eigen::Index n = state0.size() / 2;
  return (exp_and_integral(generator, t).second * state0).head(n);
}

CMatrix EigenPair::sampled() const {
  CMatrix f(phi.rows(), phi.cols());
  f.real() = phi;
  f.imag() = psi;
  return f;
}

std::vector<Root> scan_eigenfrequencies(const KernelContext& ctx, const ScanOptions& opts) {
  if (!(opts.omega_min > 0.0) || !(opts.omega_max > opts.omega_min))
    fail(ErrorCode::InvalidArgument, "frequency band needs 0 < omega_min < omega_max");
  if (opts.samples < 3) fail(ErrorCode::InvalidArgument, "scan needs at least 3 samples");

  const double log_g = std::log(std::abs(green_gram(ctx, ctx.horizon()).determinant()));
  const int count = opts.samples;
  std::vector<double> omega(count);
  std::vector<double> value(count);
  const double l0 = std::log(opts.omega_max);
  const double l1 = std::log(opts.omega_min);
  for (int i = 0; i < count; ++i) {
    omega[i] = std::exp(l0 + (l1 - l0) * i / (count - 1));
    value[i] = log_abs_det_e(ctx, omega[i]);
  }

  std::vector<Root> roots;
  for (int i = 1; i + 1 < count; ++i) {
    if (!(value[i] <= value[i - 1] && value[i] <= value[i + 1])) continue;
    const Refined r = golden_then_newton(ctx, omega[i + 1], omega[i - 1]);
    const double span = omega[i - 1] - omega[i + 1];
    if (!(r.omega >= omega[i + 1] - span && r.omega <= omega[i - 1] + span)) continue;
    if (!(r.omega >= opts.omega_min && r.omega <= opts.omega_max)) continue;
    const CMatrix e = bvp_matrices(ctx, r.omega).e;
    const LogDet ld = log_det(e);
    const Vector sv = singular_values(e);
    Root root;
    root.omega = r.omega;
    root.det_ratio = std::exp(ld.log_abs - log_g);
    root.sigma_ratio = sv(sv.size() - 1) / sv(0);
    // Newton can stall at the noise floor of det E; a rank-deficient E at
    // the stalled iterate still marks a root.
    const bool accepted = r.converged ? (root.det_ratio <= kDetAccept || root.sigma_ratio <= kKernelThreshold)
                                      : root.sigma_ratio <= kKernelThreshold;
    if (!accepted) continue;
    // Where E(ω) is rank deficient across the whole bracket, the zero cannot
    // be told apart from rounding (shooting over too long a horizon).
    const Vector left = singular_values(bvp_matrices(ctx, omega[i - 1]).e);
    const Vector right = singular_values(bvp_matrices(ctx, omega[i + 1]).e);
    const Eigen::Index last = sv.size() - 1;
    const double contrast = std::min(left(last) / left(0), right(last) / right(0));
    if (contrast < kResolvable) continue;
    // Kernel directions are the singular values that collapse at the root;
    // ones that are merely small across the bracket reflect conditioning.
    int dips = 0;
    for (Eigen::Index k = last; k >= 0; --k) {
      if (!(sv(k) <= kKernelThreshold * sv(0) && sv(k) <= kDipFactor * std::min(left(k), right(k)))) break;
      ++dips;
    }
    root.multiplicity = std::max(1, dips);
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Root& q) {
      return std::abs(q.omega - root.omega) <= 1e-9 * root.omega;
    });
    if (!duplicate) roots.push_back(root);
  }
  if (roots.empty()) fail(ErrorCode::NoRootsFound, "det E(omega) has no zeros in the band");
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.omega > b.omega; });
  return roots;
}

std::vector<EigenPair> eigenfunction_from_root(const KernelContext& ctx, const Grid& grid,
                                               double omega, int multiplicity) {
  const BvpMatrices m = bvp_matrices(ctx, omega);
  Eigen::JacobiSVD<CMatrix> svd(m.e, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const int dim = multiplicity > 0 ? multiplicity : kernel_dimension(sv);
  if (dim == 0) fail(ErrorCode::EmptyKernel, "E(omega) has no numerical kernel");
  const Eigen::Index n = sv.size();
  std::vector<EigenPair> pairs;
  for (int j = 0; j < dim; ++j) {
    EigenPair p = make_pair(ctx, grid, omega, m.d, svd.matrixV().col(n - 1 - j));
    p.multiplicity = dim;
    pairs.push_back(std::move(p));
  }
  if (dim > 1) pairs = orthonormalize(pairs, grid);
  for (auto& p : pairs) p.bvp_residual = bvp_residual(ctx, p, grid);
  return pairs;
}

std::vector<EigenPair> orthonormalize(const std::vector<EigenPair>& pairs, const Grid& grid) {
  std::vector<EigenPair> out;
  std::vector<CMatrix> done;
  for (const EigenPair& p : pairs) {
    CMatrix f = p.sampled();
    CVector state = p.state0;
    const double before = std::sqrt(inner(f, f, grid).real());
    for (std::size_t j = 0; j < done.size(); ++j) {
      const Complex c = inner(done[j], f, grid);
      f -= c * done[j];
      state -= c * out[j].state0;
    }
    const double norm = std::sqrt(inner(f, f, grid).real());
    if (!(norm > 1e-8 * before)) fail(ErrorCode::RankCollapse, "eigenfunctions are linearly dependent");
    f /= norm;
    state /= norm;
    EigenPair q = p;
    q.state0 = state;
    q.phi = f.real();
    q.psi = f.imag();
    q.multiplicity = static_cast<int>(pairs.size());
    q.conj_overlap = std::abs(inner(f.conjugate(), f, grid));
    done.push_back(f);
    out.push_back(std::move(q));
  }
  return out;
}

Vector NystromResult::positive() const {
  std::vector<double> pos;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) > 0.0) pos.push_back(eigenvalues(i));
  return Eigen::Map<Vector>(pos.data(), static_cast<Eigen::Index>(pos.size()));
}

NystromResult nystrom_oracle(const KernelContext& ctx, const Grid& grid) {
  const int n = ctx.dim();
  Matrix k = lambda_matrix(ctx, grid);
  Vector sw(n * grid.size());
  for (Eigen::Index a = 0; a < grid.size(); ++a) sw.segment(n * a, n).setConstant(std::sqrt(grid.weights(a)));
  k = sw.asDiagonal() * k * sw.asDiagonal();
  const CMatrix herm = Complex(0.0, -1.0) * k.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  NystromResult out;
  out.eigenvalues = eig.eigenvalues().reverse();
  out.vectors = eig.eigenvectors().rowwise().reverse();
  return out;
}

ScanOptions default_scan(const KernelContext& ctx) {
  ScanOptions opts;
  opts.omega_max = 1.01 * std::sqrt(0.5 * hs_norm_squared(ctx));
  opts.omega_min = 1e-2 * opts.omega_max;
  opts.samples = 2000;
  return opts;
}

SpectralBasis build_basis(const KernelContext& ctx, const Grid& grid, const BasisOptions& opts) {
  if (!(opts.capture_fraction > 0.0 && opts.capture_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "capture_fraction must lie in (0, 1)");
  if (std::abs(grid.horizon - ctx.horizon()) > 1e-12 * ctx.horizon())
    fail(ErrorCode::GridMismatch, "grid horizon differs from the oscillator horizon");
  SpectralBasis basis;
  basis.grid = grid;
  basis.hs_total = hs_norm_squared(ctx);
  std::vector<Root> roots;
  try {
    roots = scan_eigenfrequencies(ctx, opts.scan);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRootsFound) throw;
    fail(ErrorCode::CaptureUnreachable, "no eigenfrequencies in the band; raise omega_max");
  }
  for (const Root& r : roots) {
    for (EigenPair& p : eigenfunction_from_root(ctx, grid, r.omega, r.multiplicity)) {
      basis.hs_captured += 2.0 * p.omega * p.omega;
      basis.pairs.push_back(std::move(p));
    }
    if (basis.hs_captured > basis.hs_total * (1.0 + 1e-8))
      fail(ErrorCode::RefinementStalled,
           "retained modes exceed the Hilbert-Schmidt norm; spurious or repeated root");
    if (basis.capture() >= opts.capture_fraction) return basis;
  }
  fail(ErrorCode::CaptureUnreachable,
       "band exhausted at capture " + std::to_string(basis.capture()) +
           "; lower omega_min, or shorten T if det E(omega) is unresolvable at low frequencies");
}

Matrix basis_gram(const EigenPair& a, const EigenPair& b, const Grid& grid) {
  Matrix g = Matrix::Zero(2, 2);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double w = grid.weights(k);
    g(0, 0) += w * a.phi.col(k).dot(b.phi.col(k));
    g(0, 1) += w * a.phi.col(k).dot(b.psi.col(k));
    g(1, 0) += w * a.psi.col(k).dot(b.phi.col(k));
    g(1, 1) += w * a.psi.col(k).dot(b.psi.col(k));
  }
  return g;
}

double mercer_residual(const KernelContext& ctx, const SpectralBasis& basis) {
  const Grid& grid = basis.grid;
  const Matrix bj = symplectic_unit();
  const int n = ctx.dim();
  double acc = 0.0;
  for (Eigen::Index a = 0; a < grid.size(); ++a) {
    for (Eigen::Index b = 0; b < grid.size(); ++b) {
      Matrix approx = Matrix::Zero(n, n);
      for (const EigenPair& p : basis.pairs) {
        Matrix ha(n, 2), hb(n, 2);
        ha << p.phi.col(a), p.psi.col(a);
        hb << p.phi.col(b), p.psi.col(b);
        approx += 2.0 * p.omega * ha * bj * hb.transpose();
      }
      acc += grid.weights(a) * grid.weights(b) *
             (lambda_kernel(ctx, grid.nodes(a), grid.nodes(b)) - approx).squaredNorm();
    }
  }
  return acc;
}

}  // namespace qeflab
