// Acceptance suite: one PASS/FAIL line per criterion.
//
//   qeflab_acceptance                 run everything
//   qeflab_acceptance --criterion 7   run one criterion
//
// Exit status is zero only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "qeflab/eigensolver.hpp"
#include "qeflab/error.hpp"
#include "qeflab/fock.hpp"
#include "qeflab/kernels.hpp"
#include "qeflab/mc.hpp"
#include "qeflab/model.hpp"
#include "qeflab/qef.hpp"
#include "qeflab/qkl.hpp"

using namespace qeflab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Pipeline {
  OscillatorSpec spec;
  KernelContext ctx;
  Grid grid;
  SpectralBasis basis;
  Pipeline(const OscillatorSpec& s, int panels = 8, int per_panel = 16)
      : spec(s), ctx(s), grid(make_grid(s.horizon, panels, per_panel)) {
    BasisOptions opts;
    opts.scan = default_scan(ctx);
    basis = build_basis(ctx, grid, opts);
  }
  GaussianStateData state() const { return solve_state_ale(ctx.drift(), ctx.system().dispersion); }
};

std::vector<OscillatorSpec> random_specs(std::uint64_t seed, int count, bool mixed_sizes, double horizon = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<OscillatorSpec> out;
  for (int i = 0; i < count; ++i) out.push_back(oracle::random_spec(rng, mixed_sizes && i % 2 ? 4 : 2, horizon));
  return out;
}

// Symmetrised covariance matrix on the grid, built from the oracle formulas.
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

Outcome pr_identity() {
  double worst = 0.0;
  for (const OscillatorSpec& s : random_specs(101, 50, true)) {
    const SystemMatrices sys = build_system(s);
    const Matrix a = oracle::drift(s);
    const Matrix w = oracle::mho(s);
    worst = std::max(worst, (a * s.ccr + s.ccr * a.transpose() + w).norm() / w.norm());
    worst = std::max(worst, sys.pr_residual / sys.mho.norm());
    worst = std::max(worst, (sys.drift - a).norm() / a.norm());
  }
  return {worst <= 1e-12, "max relative residual " + fmt(worst) + " over 50 systems (tol 1e-12)"};
}

Outcome ccr_roundtrip() {
  double worst = 0.0;
  for (const OscillatorSpec& s : random_specs(202, 50, true)) {
    const SystemMatrices sys = build_system(s);
    if (!sys.hurwitz) return {false, "random system is not Hurwitz"};
    worst = std::max(worst, (recover_ccr(sys.drift, sys.mho) - s.ccr).norm() / s.ccr.norm());
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst) + " over 50 systems (tol 1e-8)"};
}

Outcome green_equivalence() {
  std::vector<OscillatorSpec> specs{oracle::fixture()};
  for (const OscillatorSpec& s : random_specs(303, 10, true)) specs.push_back(s);
  double worst = 0.0;
  for (const OscillatorSpec& s : specs) {
    const KernelContext ctx(s);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double a = (i + 0.5) / 10.0 * s.horizon, b = (j + 0.5) / 10.0 * s.horizon;
        const Matrix ref = lambda_kernel(ctx, a, b);
        worst = std::max(worst, oracle::max_abs(green_function(ctx, a, b) - ref) / std::max(1.0, oracle::max_abs(ref)));
        worst = std::max(worst, oracle::max_abs(ref - oracle::lambda(s, a - b)) / std::max(1.0, oracle::max_abs(ref)));
      }
  }
  return {worst <= 1e-8, "max deviation " + fmt(worst) + " on 10x10 points, fixture + 10 systems (tol 1e-8)"};
}

Outcome determinant_law() {
  double worst = 0.0;
  for (double t : {0.1, 1.0, 5.0}) {
    for (const OscillatorSpec& s : random_specs(404, 20, true, t)) {
      const Matrix a = oracle::drift(s);
      const double rhs = std::exp(-t * a.trace()) * (-oracle::mho(s) * s.ccr.inverse()).determinant();
      const double lhs = oracle::green_gram_det(s, t);
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
      worst = std::max(worst, green_gram_det_error(KernelContext(s), t));
    }
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst) + " for T in {0.1,1,5} x 20 systems (tol 1e-8)"};
}

Outcome eigen_cross_validation() {
  const Pipeline p(oracle::fixture());
  const Vector coarse = nystrom_oracle(p.ctx, p.grid).positive();
  const Vector fine = nystrom_oracle(p.ctx, make_grid(1.0, 16, 16)).positive();
  double worst = 0.0, worst_ratio = 0.0;
  for (std::size_t k = 0; k < p.basis.pairs.size(); ++k) {
    const double w = p.basis.pairs[k].omega;
    const double gc = std::abs(coarse(static_cast<Eigen::Index>(k)) - w) / w;
    const double gf = std::abs(fine(static_cast<Eigen::Index>(k)) - w) / w;
    worst = std::max(worst, gc);
    worst_ratio = std::max(worst_ratio, gf / gc);
  }
  const bool pass = worst <= 5e-3 && worst_ratio <= 0.5;
  return {pass, std::to_string(p.basis.pairs.size()) + " modes, max gap " + fmt(worst) +
                    " (tol 5e-3), worst fine/coarse gap ratio " + fmt(worst_ratio) + " (need <= 0.5)"};
}

Outcome basis_orthonormality() {
  double worst = 0.0;
  std::size_t pairs = 0;
  for (const OscillatorSpec& s : {oracle::fixture(), oracle::squeezed_fixture(), random_specs(505, 1, false)[0]}) {
    const Pipeline p(s);
    for (std::size_t j = 0; j < p.basis.pairs.size(); ++j)
      for (std::size_t k = 0; k < p.basis.pairs.size(); ++k) {
        const Matrix g = basis_gram(p.basis.pairs[j], p.basis.pairs[k], p.grid);
        worst = std::max(worst, oracle::max_abs(g - (j == k ? 0.5 : 0.0) * Matrix::Identity(2, 2)));
      }
    pairs += p.basis.pairs.size();
  }
  return {worst <= 1e-6, "max deviation " + fmt(worst) + " over " + std::to_string(pairs) + " retained pairs (tol 1e-6)"};
}

Outcome hs_identity() {
  bool pass = true;
  std::ostringstream os;
  for (const OscillatorSpec& s : {oracle::fixture(), oracle::squeezed_fixture(), random_specs(606, 2, true)[1]}) {
    const Pipeline p(s);
    const double ref = oracle::hs_norm_reference(s);
    double two_sum = 0.0;
    for (const EigenPair& e : p.basis.pairs) two_sum += 2.0 * e.omega * e.omega;
    const double gap = std::abs(two_sum - ref);
    const double bound = (1.0 - p.basis.capture()) * ref + 1e-6;
    pass = pass && gap <= bound;
    os << "gap " << fmt(gap) << " <= " << fmt(bound) << "; ";
  }
  return {pass, os.str()};
}

Outcome mercer() {
  bool pass = true;
  std::ostringstream os;
  for (const OscillatorSpec& s : {oracle::fixture(), oracle::squeezed_fixture()}) {
    const Pipeline p(s);
    const double res = mercer_residual(p.ctx, p.basis);
    const double slack = std::abs(hs_norm_squared_grid(p.ctx, p.grid) - p.basis.hs_total) + 1e-6;
    const double bound = p.basis.hs_tail() + slack;
    pass = pass && res <= bound;
    os << "residual " << fmt(res) << " <= tail " << fmt(p.basis.hs_tail()) << " + slack " << fmt(slack) << "; ";
  }
  return {pass, os.str()};
}

Outcome wiener() {
  const Pipeline p(oracle::fixture());
  const QklBasis q = build_qkl(p.basis, 2.0);
  const double tail = wiener_trace_tail(q);
  const double res = wiener_residual(q);
  std::mt19937_64 rng(707);
  std::normal_distribution<double> d;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    Matrix f(2, p.grid.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = d(rng);
    const double ff = grid_inner(p.grid, f, f);
    worst = std::max(worst, (grid_inner(p.grid, f, apply_K(q, f)) - ff) / ff);
  }
  const bool pass = res <= tail * tail && worst <= 1e-12;
  return {pass, "residual " + fmt(res) + " <= tail^2 " + fmt(tail * tail) + "; max (<f,Kf>-<f,f>)/<f,f> " + fmt(worst) +
                    " over 100 functions"};
}

struct McCheck {
  bool pass = true;
  std::string detail;
};

McCheck mc_protocol(const Pipeline& p, const std::vector<double>& fractions) {
  const QefOperators ops(p.ctx, p.basis, p.state());
  McCheck out;
  std::ostringstream os;
  McConfig cfg;
  cfg.samples = 100000;
  cfg.seed = 20240917;
  cfg.batch = 1000;
  for (double fr : fractions) {
    const double theta = fr * ops.theta_critical();
    const double xi = compute_qef_value(ops, theta);
    for (const McEstimate& e : estimate_qef_mc(ops, theta, cfg)) {
      const double z = (e.mean - xi) / e.stderr_;
      out.pass = out.pass && std::abs(z) <= 3.0;
      os << fr << "*theta_c " << to_string(e.route) << " z=" << fmt(z) << "; ";
    }
  }
  out.detail = os.str();
  return out;
}

Outcome qef_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const Pipeline fixture(oracle::fixture());
  const QefOperators ops(fixture.ctx, fixture.basis, fixture.state());
  const double tc = ops.theta_critical();
  std::ostringstream os;
  bool pass = false;
  if (!std::isfinite(tc)) {
    os << "fixture theta_critical is infinite (theta*r(PK) -> " << fmt(ops.saturation())
       << " from below), so {0.2,0.5}*theta_critical is undefined";
  } else {
    const McCheck c = mc_protocol(fixture, {0.2, 0.5});
    pass = c.pass;
    os << c.detail;
  }
  // Same protocol where theta_critical is finite, reported for information.
  const McCheck squeezed = mc_protocol(Pipeline(oracle::squeezed_fixture()), {0.2, 0.5});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  os << " | squeezed fixture: " << (squeezed.pass ? "agrees" : "disagrees") << " (" << squeezed.detail << ")";
  os << " | " << fmt(secs) << " s";
  return {pass && secs <= 300.0, os.str()};
}

Outcome criticality() {
  std::vector<OscillatorSpec> specs{oracle::squeezed_fixture()};
  for (const OscillatorSpec& s : random_specs(1111, 4, true)) specs.push_back(s);
  bool pass = true;
  int finite = 0;
  std::ostringstream os;
  for (const OscillatorSpec& s : specs) {
    const Pipeline p(s);
    const QefOperators ops(p.ctx, p.basis, p.state());
    const double tc = ops.theta_critical();
    if (!std::isfinite(tc)) continue;
    ++finite;
    const QefReport below = compute_qef(ops, 0.999 * tc);
    const QefReport above = compute_qef(ops, 1.001 * tc);
    const bool ok = below.xi && std::isfinite(*below.xi) && above.diverged();
    pass = pass && ok;
    os << "theta_c " << fmt(tc) << (ok ? " ok" : " FAIL") << "; ";
  }
  pass = pass && finite > 0;
  return {pass, std::to_string(finite) + " systems with finite theta_c: " + os.str()};
}

Outcome classical_limit() {
  double worst = 0.0;
  for (const OscillatorSpec& s : {oracle::fixture(), oracle::squeezed_fixture(), random_specs(1212, 2, true)[1]}) {
    const Pipeline p(s);
    const QefOperators ops(p.ctx, p.basis, p.state());
    const Matrix pw = oracle_p_weighted(s, p.grid);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(pw, Eigen::EigenvaluesOnly);
    const double r = eig.eigenvalues().maxCoeff();
    for (double theta : {0.1 / r, 0.5 / r, 0.9 / r}) {
      const QefReport rep = compute_qef(ops, theta, QefOptions{true});
      if (!rep.xi) return {false, "classical QEF diverged below 1/r(P)"};
      const double log_det = (Matrix::Identity(pw.rows(), pw.cols()) - theta * pw).llt().matrixLLT().diagonal().array().log().sum() * 2.0;
      const double expected = std::exp(-0.5 * log_det);
      worst = std::max(worst, std::abs(*rep.xi - expected) / expected);
    }
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst) + " against det(I - theta P)^(-1/2) (tol 1e-8)"};
}

Outcome fock_identity() {
  FockQuadrature quad;
  quad.order = 40;
  const std::vector<int> sizes{10, 20, 30, 40};
  std::vector<double> errs;
  std::string listing;
  for (int n : sizes) {
    const TruncatedPair pair = build_pair(n);
    errs.push_back(corner_error(lhs_exponential(pair, 0.2), rhs_average(pair, 0.2, quad)));
    listing += " N=" + std::to_string(n) + ":" + fmt(errs.back());
  }
  bool pass = errs.back() <= 1e-6;
  for (std::size_t i = 1; i < errs.size(); ++i) pass = pass && errs[i] < errs[i - 1];
  return {pass, "corner error" + listing + " (N=40 tol 1e-6, strictly decreasing)"};
}

Outcome fock_ode() {
  const TruncatedPair pair = build_pair(40);
  // With N = 40 the corner stays resolved up to about σ = 0.8; beyond that
  // the truncation edge reaches it and the residual no longer measures the
  // difference quotient.
  const std::vector<double> sigmas{0.2, sigma_of_omega(0.2), 0.8};
  const OdeReport coarse = verify_ode(pair, sigmas, 2e-3);
  const OdeReport fine = verify_ode(pair, sigmas, 1e-3);
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    worst_ratio = std::min(worst_ratio, coarse.residuals[i] / fine.residuals[i]);
  double roundtrip = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double w = 1e-4 * std::pow(10.0, i / 100.0);
    roundtrip = std::max(roundtrip, std::abs(omega_of_sigma(sigma_of_omega(w)) - w) / std::max(1.0, w));
  }
  const bool pass = worst_ratio >= 3.0 && roundtrip <= 1e-12;
  return {pass, "min residual ratio h/(h/2) " + fmt(worst_ratio) + " (need >= 3, O(h^2) gives 4); round-trip " +
                    fmt(roundtrip) + " (tol 1e-12)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  ::setenv("QEFLAB_THREADS", "1", 1);
  const fs::path root = fs::temp_directory_path() / "qeflab_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  nlohmann::json doc = nlohmann::json::parse(R"({
    "oscillator": {"Theta": [[0, 1], [-1, 0]], "R": [[1, 0], [0, 3]], "M": [[1, 0], [0, 1]], "T": 1.0},
    "grid": {"panels": 8, "nodes_per_panel": 16},
    "eigen": {"samples": 2000, "capture_fraction": 0.99},
    "qef": {"theta_list": [0.0, 0.5, 1.0, 1.3]},
    "mc": {"samples": 20000, "seed": 424242, "batch": 1000, "theta_fractions": [0.2]},
    "fock": {"N": [40], "omega_list": [0.2], "quad_order": 40, "corner_tolerance": 1e-6},
    "output_dir": "out"
  })");
  const fs::path config = root / "config.json";
  std::ofstream(config) << doc.dump(2);
  std::ostringstream log, err;
  for (const char* run_dir : {"a", "b"}) {
    for (const char* cmd : {"model-check", "eigen", "qef", "validate", "fock"}) {
      const int code = cli::run({cmd, "--config", config.string(), "--seed", "424242", "--out", (root / run_dir).string()},
                                log, err);
      if (code != cli::kExitPass && code != cli::kExitMismatch)
        return {false, std::string(cmd) + " exited with " + std::to_string(code) + ": " + err.str()};
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const fs::path other = root / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
      return {false, entry.path().filename().string() + " differs between runs"};
    ++files;
  }
  fs::remove_all(root);
  return {files == 7, std::to_string(files) + " CSV files byte-identical across two single-threaded runs"};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "PR identity", pr_identity},
      {2, "CCR round-trip", ccr_roundtrip},
      {3, "Green-function equivalence", green_equivalence},
      {4, "determinant law for G(T)", determinant_law},
      {5, "shooting vs Nystrom eigenfrequencies", eigen_cross_validation},
      {6, "basis orthonormality", basis_orthonormality},
      {7, "Hilbert-Schmidt identity", hs_identity},
      {8, "Mercer truncation", mercer},
      {9, "Wiener identity and K <= I", wiener},
      {10, "QEF closed form vs Monte-Carlo on the fixture", qef_oracle},
      {11, "criticality", criticality},
      {12, "classical limit", classical_limit},
      {13, "Fock-space identity", fock_identity},
      {14, "Fock-space ODE and sigma-omega bijection", fock_ode},
      {15, "determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qeflab acceptance suite"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-15)")->check(CLI::Range(1, 15));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
