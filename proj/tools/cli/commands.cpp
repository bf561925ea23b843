#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "csv.hpp"
#include "qeflab/eigensolver.hpp"
#include "qeflab/fock.hpp"
#include "qeflab/kernels.hpp"
#include "qeflab/mc.hpp"
#include "qeflab/qef.hpp"
#include "qeflab/qkl.hpp"
#include "qeflab/quadrature.hpp"

namespace qeflab::cli {
namespace {

namespace fs = std::filesystem;

struct Pipeline {
  KernelContext ctx;
  Grid grid;
  SpectralBasis basis;
};

BasisOptions basis_options(const RunConfig& cfg, const KernelContext& ctx) {
  BasisOptions opts;
  opts.scan = default_scan(ctx);
  if (cfg.eigen.omega_max) opts.scan.omega_max = *cfg.eigen.omega_max;
  opts.scan.omega_min = cfg.eigen.omega_min ? *cfg.eigen.omega_min : 1e-2 * opts.scan.omega_max;
  if (opts.scan.omega_min >= opts.scan.omega_max)
    fail(ErrorCode::InvalidArgument, "omega_min must be below omega_max");
  opts.scan.samples = cfg.eigen.samples;
  opts.capture_fraction = cfg.eigen.capture_fraction;
  return opts;
}

Pipeline make_pipeline(const RunConfig& cfg) {
  KernelContext ctx(cfg.oscillator);
  Grid grid = make_grid(cfg.oscillator.horizon, cfg.grid.panels, cfg.grid.nodes_per_panel);
  SpectralBasis basis = build_basis(ctx, grid, basis_options(cfg, ctx));
  return {std::move(ctx), std::move(grid), std::move(basis)};
}

fs::path output(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir / name;
}

std::string value_or_diverged(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string("diverged");
}

}  // namespace

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QEFLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotAntisymmetric:
    case ErrorCode::SingularTheta:
    case ErrorCode::NotHurwitz:
    case ErrorCode::SingularMho:
    case ErrorCode::CouplingRankDeficient:
    case ErrorCode::SingularS:
    case ErrorCode::GridMismatch:
    case ErrorCode::NonpositiveOmega:
    case ErrorCode::SchemaViolation:
      return kExitConfig;
    default:
      return kExitNumeric;
  }
}

std::string error_json(ErrorCode code, const std::string& message) {
  return nlohmann::json{{"error", to_string(code)}, {"message", message}}.dump();
}

int cmd_model_check(const RunConfig& cfg, std::ostream& log) {
  const OscillatorSpec& spec = cfg.oscillator;
  const SystemMatrices sys = build_system(spec);
  if (!sys.hurwitz) fail(ErrorCode::NotHurwitz, "drift matrix A is not Hurwitz");
  const Matrix ccr = recover_ccr(sys.drift, sys.mho);
  const GaussianStateData state = solve_state_ale(sys.drift, sys.dispersion);
  const Matrix bbt = sys.dispersion * sys.dispersion.transpose();
  const double ale = (sys.drift * state.p0 + state.p0 * sys.drift.transpose() + bbt).norm() /
                     std::max(bbt.norm(), 1e-300);

  struct Row {
    std::string name;
    double value;
    double threshold;
  };
  std::vector<Row> rows{
      {"pr_residual_rel", sys.pr_residual / std::max(sys.mho.norm(), 1e-300), 1e-12},
      {"ccr_roundtrip_rel", (ccr - spec.ccr).norm() / spec.ccr.norm(), 1e-8},
      {"ale_residual_rel", ale, 1e-10},
      {"max_real_eigenvalue", sys.max_real_eigenvalue, -kHurwitzMargin},
  };
  if (!sys.mho_singular && coupling_full_rank(spec)) {
    const KernelContext ctx(spec);
    rows.push_back({"det_g_identity_rel", green_gram_det_error(ctx, spec.horizon), 1e-8});
  }

  CsvWriter csv(output(cfg, "model.csv"), {"quantity", "value", "threshold", "pass"});
  bool all = true;
  for (const Row& r : rows) {
    const bool pass = r.value <= r.threshold;
    all = all && pass;
    csv.field(r.name).field(r.value).field(r.threshold).field(std::string(pass ? "1" : "0"));
    csv.end_row();
    log << r.name << " = " << format_double(r.value) << (pass ? "  ok" : "  FAIL") << '\n';
  }
  return all ? kExitPass : kExitMismatch;
}

int cmd_eigen(const RunConfig& cfg, std::ostream& log) {
  const Pipeline p = make_pipeline(cfg);
  {
    CsvWriter csv(output(cfg, "eigen_shooting.csv"),
                  {"index", "omega", "multiplicity", "bvp_residual", "conj_overlap", "capture"});
    double captured = 0.0;
    long long k = 0;
    for (const EigenPair& e : p.basis.pairs) {
      captured += 2.0 * e.omega * e.omega;
      csv.field(k++).field(e.omega).field(static_cast<long long>(e.multiplicity)).field(e.bvp_residual)
          .field(e.conj_overlap).field(captured / p.basis.hs_total);
      csv.end_row();
    }
  }
  {
    const Vector ny = nystrom_oracle(p.ctx, p.grid).positive();
    CsvWriter csv(output(cfg, "eigen_nystrom.csv"), {"index", "omega_nystrom", "omega_shooting", "relative_gap"});
    for (Eigen::Index k = 0; k < ny.size(); ++k) {
      csv.field(static_cast<long long>(k)).field(ny(k));
      if (k < static_cast<Eigen::Index>(p.basis.pairs.size())) {
        const double w = p.basis.pairs[static_cast<std::size_t>(k)].omega;
        csv.field(w).field(std::abs(ny(k) - w) / w);
      } else {
        csv.field(std::string("")).field(std::string(""));
      }
      csv.end_row();
    }
  }
  {
    CsvWriter csv(output(cfg, "basis_gram.csv"), {"j", "k", "g00", "g01", "g10", "g11"});
    for (std::size_t j = 0; j < p.basis.pairs.size(); ++j)
      for (std::size_t k = 0; k < p.basis.pairs.size(); ++k) {
        const Matrix g = basis_gram(p.basis.pairs[j], p.basis.pairs[k], p.grid);
        csv.field(static_cast<long long>(j)).field(static_cast<long long>(k))
            .field(g(0, 0)).field(g(0, 1)).field(g(1, 0)).field(g(1, 1));
        csv.end_row();
      }
  }
  log << p.basis.pairs.size() << " modes, capture " << format_double(p.basis.capture()) << '\n';
  return kExitPass;
}

int cmd_qef(const RunConfig& cfg, std::ostream& log) {
  const Pipeline p = make_pipeline(cfg);
  const GaussianStateData state = solve_state_ale(p.ctx.drift(), p.ctx.system().dispersion);
  const QefOperators ops(p.ctx, p.basis, state);
  CsvWriter csv(output(cfg, "qef.csv"), {"theta", "C", "tail_C", "spectral_radius", "theta_critical", "xi",
                                         "xi_classical", "trace_tail", "capture"});
  for (double theta : cfg.qef.theta_list) {
    const QefReport r = compute_qef(ops, theta);
    csv.field(theta).field(r.c).field(r.tail_c).field(r.spectral_radius).field(r.theta_critical)
        .field(value_or_diverged(r.xi)).field(value_or_diverged(r.xi_classical)).field(r.trace_tail)
        .field(r.capture);
    csv.end_row();
    log << "theta " << format_double(theta) << " xi " << value_or_diverged(r.xi) << '\n';
  }
  return kExitPass;
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const Pipeline p = make_pipeline(cfg);
  const GaussianStateData state = solve_state_ale(p.ctx.drift(), p.ctx.system().dispersion);
  const QefOperators ops(p.ctx, p.basis, state);
  const double critical = ops.theta_critical();
  if (!std::isfinite(critical))
    fail(ErrorCode::InvalidArgument,
         "theta_critical is infinite for this state; fractions of it do not define theta");
  McConfig mc = cfg.mc.base;
  mc.threads = thread_budget();

  CsvWriter csv(output(cfg, "mc.csv"), {"theta", "estimator", "mean", "stderr", "n_eff", "diverged_fraction",
                                        "seed", "xi", "kurtosis", "unreliable", "capture", "pass"});
  bool all = true;
  for (double fraction : cfg.mc.theta_fractions) {
    const double theta = fraction * critical;
    const QefReport closed = compute_qef(ops, theta);
    for (const McEstimate& e : estimate_qef_mc(ops, theta, mc)) {
      const bool pass = std::abs(e.mean - *closed.xi) <= 3.0 * e.stderr_;
      all = all && pass;
      csv.field(theta).field(to_string(e.route)).field(e.mean).field(e.stderr_)
          .field(static_cast<unsigned long long>(e.n_eff)).field(e.diverged_fraction)
          .field(static_cast<unsigned long long>(e.seed)).field(*closed.xi).field(e.kurtosis)
          .field(std::string(e.unreliable ? "1" : "0")).field(e.capture)
          .field(std::string(pass ? "1" : "0"));
      csv.end_row();
      log << "theta " << format_double(theta) << " " << to_string(e.route) << " mean "
          << format_double(e.mean) << " +- " << format_double(e.stderr_) << " xi "
          << format_double(*closed.xi) << (pass ? "  ok" : "  FAIL") << '\n';
    }
  }
  return all ? kExitPass : kExitMismatch;
}

int cmd_fock(const RunConfig& cfg, std::ostream& log) {
  CsvWriter csv(output(cfg, "fock.csv"), {"N", "omega", "quad_order", "corner_error", "ode_residual", "pass"});
  bool all = true;
  for (int n : cfg.fock.n_list) {
    const TruncatedPair pair = build_pair(n);
    for (double omega : cfg.fock.omega_list) {
      FockQuadrature quad;
      quad.order = cfg.fock.quad_order;
      quad.check = false;
      const double err = corner_error(rhs_average(pair, omega, quad), lhs_exponential(pair, omega));
      const double sigma = sigma_of_omega(omega);
      const OdeReport ode = verify_ode(pair, {sigma}, 1e-3, cfg.fock.quad_order);
      const bool pass = err <= cfg.fock.corner_tolerance;
      all = all && pass;
      csv.field(static_cast<long long>(n)).field(omega).field(static_cast<long long>(quad.order)).field(err)
          .field(ode.max_residual).field(std::string(pass ? "1" : "0"));
      csv.end_row();
      log << "N " << n << " omega " << format_double(omega) << " corner " << format_double(err)
          << (pass ? "  ok" : "  FAIL") << '\n';
    }
  }
  return all ? kExitPass : kExitMismatch;
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (command == "model-check") return cmd_model_check(cfg, out);
    if (command == "eigen") return cmd_eigen(cfg, out);
    if (command == "qef") return cmd_qef(cfg, out);
    if (command == "validate") return cmd_validate(cfg, out);
    if (command == "fock") return cmd_fock(cfg, out);
    err << error_json(ErrorCode::InvalidArgument, "unknown command '" + command + "'") << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()) << '\n';
    return exit_code_for(e.code());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qeflab: quadratic-exponential functionals of open quantum harmonic oscillators"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  for (const char* name : {"model-check", "eigen", "qef", "validate", "fock"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "overrides mc.seed");
    sub->add_option("--out", out_dir, "overrides output_dir");
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << error_json(ErrorCode::InvalidArgument, e.what()) << '\n';
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()) << '\n';
    return exit_code_for(e.code());
  }
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) cfg.mc.base.seed = seed;
  if (sub->count("--out")) cfg.output_dir = out_dir;
  return run_command(command, cfg, out, err);
}

}  // namespace qeflab::cli
