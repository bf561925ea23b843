#include "qeflab/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "qeflab/error.hpp"
#include "qeflab/kernels.hpp"

namespace qeflab {
namespace {

constexpr double kExponentCap = 700.0;
constexpr double kDivergedLimit = 0.01;
constexpr double kCovarianceClip = 1e-10;

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t batch, std::uint64_t route) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32),
                    static_cast<std::uint32_t>(route)};
  return std::mt19937_64(seq);
}

Matrix normals(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist;
  Matrix x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = dist(rng);
  return x;
}

Matrix covariance_root(const Matrix& cov) {
  bool ok = true;
  Matrix root = psd_sqrt(0.5 * (cov + cov.transpose()), kCovarianceClip, &ok);
  if (!ok) fail(ErrorCode::CovarianceNotPSD, "covariance has eigenvalues below -1e-10*lambda_max");
  return root;
}

struct BatchResult {
  double mean = 0.0;
  std::size_t diverged = 0;
};

template <typename Work>
std::vector<BatchResult> run_batches(std::size_t count, unsigned threads, const Work& work) {
  std::vector<BatchResult> out(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < count; b = next++) out[b] = work(b);
  };
  const unsigned pool = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (pool == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> team;
  for (unsigned i = 0; i < pool; ++i) team.emplace_back(worker);
  for (auto& t : team) t.join();
  return out;
}

}  // namespace

std::string to_string(McRoute route) { return route == McRoute::Z ? "Z" : "N"; }

std::vector<Matrix> sample_Z_paths(const QklBasis& qkl, std::size_t count, std::uint64_t seed,
                                   bool unit_weights) {
  const int n = qkl.dim();
  const Eigen::Index nodes = qkl.grid().size();
  const std::size_t modes = qkl.modes();
  auto rng = substream(seed, 0, 2);
  std::vector<Matrix> paths;
  paths.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const Matrix c = normals(rng, 2, static_cast<Eigen::Index>(modes));
    Matrix z = Matrix::Zero(n, nodes + 1);
    for (std::size_t k = 0; k < modes; ++k) {
      const Eigen::Index kk = static_cast<Eigen::Index>(k);
      const double scale = unit_weights ? 1.0 : std::sqrt(qkl.tanc_values(kk));
      z.rightCols(nodes) += scale * (qkl.cum_phi[k] * c(0, kk) + qkl.cum_psi[k] * c(1, kk));
    }
    paths.push_back(std::move(z));
  }
  return paths;
}

std::vector<Matrix> sample_N_paths(const KernelContext& ctx, const Matrix& p0, const Grid& grid,
                                   std::size_t count, std::uint64_t seed) {
  const int n = ctx.dim();
  const Matrix root = covariance_root(covariance_matrix(ctx, p0, grid));
  auto rng = substream(seed, 0, 3);
  std::vector<Matrix> paths;
  paths.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const Vector v = root * normals(rng, root.cols(), 1);
    paths.push_back(Eigen::Map<const Matrix>(v.data(), n, grid.size()));
  }
  return paths;
}

McEstimate estimate_qef_mc(const QefOperators& ops, double theta, const McConfig& cfg, McRoute route) {
  if (cfg.samples == 0 || cfg.batch == 0 || cfg.samples < 2 * cfg.batch)
    fail(ErrorCode::InvalidArgument, "mc requires samples >= 2*batch > 0");
  if (!(theta >= 0.0)) fail(ErrorCode::InvalidArgument, "theta must be nonnegative");
  const double critical = ops.theta_critical();
  if (theta >= critical) {
    std::ostringstream os;
    os.precision(17);
    os << "theta " << theta << " is at or above theta_critical " << critical
       << "; the estimator has infinite mean";
    fail(ErrorCode::ThetaSupercritical, os.str());
  }

  const Matrix& v = ops.spectral_vectors();
  const Vector tau = ops.k_weights(theta);
  const Vector root_tau = tau.cwiseSqrt();
  const Matrix& p = ops.p_weighted();
  const Eigen::Index size = p.rows();

  Matrix n_root;
  if (route == McRoute::N) {
    const Vector inv = ops.sqrt_weights().cwiseInverse();
    const Matrix cov = inv.asDiagonal() * p * inv.asDiagonal();
    n_root = ops.sqrt_weights().asDiagonal() * covariance_root(cov);
  }

  const std::size_t batches = cfg.samples / cfg.batch;
  const Eigen::Index width = static_cast<Eigen::Index>(cfg.batch);
  const std::uint64_t route_id = route == McRoute::Z ? 0 : 1;

  auto work = [&](std::size_t b) {
    auto rng = substream(cfg.seed, b, route_id);
    Vector quad;
    if (route == McRoute::Z) {
      const Matrix u = v * (root_tau.asDiagonal() * normals(rng, size, width));
      quad = (u.cwiseProduct(p * u)).colwise().sum().transpose();
    } else {
      const Matrix x = n_root * normals(rng, n_root.cols(), width);
      quad = (tau.asDiagonal() * (v.transpose() * x).cwiseAbs2()).colwise().sum().transpose();
    }
    BatchResult r;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < width; ++i) {
      double x = 0.5 * theta * quad(i);
      if (x > kExponentCap) {
        x = kExponentCap;
        ++r.diverged;
      }
      acc += std::exp(x);
    }
    r.mean = acc / static_cast<double>(width);
    return r;
  };
  const std::vector<BatchResult> results = run_batches(batches, cfg.threads, work);

  McEstimate est;
  est.route = route;
  est.theta = theta;
  est.seed = cfg.seed;
  est.n_eff = batches * cfg.batch;
  est.capture = ops.basis().capture();
  std::size_t diverged = 0;
  double sum = 0.0;
  for (const BatchResult& r : results) {
    sum += r.mean;
    diverged += r.diverged;
  }
  est.diverged_fraction = static_cast<double>(diverged) / static_cast<double>(est.n_eff);
  if (est.diverged_fraction > kDivergedLimit) {
    std::ostringstream os;
    os << "diverged fraction " << est.diverged_fraction << " exceeds 1%";
    fail(ErrorCode::OverflowDominated, os.str());
  }
  const double nb = static_cast<double>(batches);
  const double mean = sum / nb;
  double m2 = 0.0, m4 = 0.0;
  for (const BatchResult& r : results) {
    const double d = r.mean - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= nb;
  m4 /= nb;
  est.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  const double scale = std::exp(-compute_C(ops.basis(), theta).value - ops.c_remainder(theta));
  est.mean = scale * mean;
  est.stderr_ = scale * std::sqrt(m2 * nb / (nb - 1.0) / nb);
  est.second_moment_finite = 2.0 * theta * ops.pk_eigenvalues(theta)(0) < 1.0;
  est.unreliable = theta > 0.5 * critical * (1.0 + 1e-12) || !est.second_moment_finite ||
                   est.kurtosis > kKurtosisGuard;
  return est;
}

std::vector<McEstimate> estimate_qef_mc(const QefOperators& ops, double theta, const McConfig& cfg) {
  return {estimate_qef_mc(ops, theta, cfg, McRoute::Z), estimate_qef_mc(ops, theta, cfg, McRoute::N)};
}

}  // namespace qeflab
