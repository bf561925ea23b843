#include <benchmark/benchmark.h>

#include "qeflab/eigensolver.hpp"
#include "qeflab/fock.hpp"
#include "qeflab/kernels.hpp"
#include "qeflab/qef.hpp"

namespace {

qeflab::OscillatorSpec fixture() {
  qeflab::OscillatorSpec s;
  s.ccr = qeflab::symplectic_unit();
  s.energy = qeflab::Matrix::Identity(2, 2);
  s.coupling = qeflab::Matrix::Identity(2, 2);
  s.horizon = 1.0;
  return s;
}

void BM_MatrixExp(benchmark::State& state) {
  const qeflab::KernelContext ctx(fixture());
  const qeflab::CMatrix d = qeflab::bvp_matrices(ctx, 0.3).d;
  for (auto _ : state) benchmark::DoNotOptimize(qeflab::matrix_exp(d).value);
}
BENCHMARK(BM_MatrixExp);

void BM_LambdaMatrix(benchmark::State& state) {
  const qeflab::KernelContext ctx(fixture());
  const qeflab::Grid grid = qeflab::make_grid(1.0, static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(qeflab::lambda_matrix(ctx, grid));
}
BENCHMARK(BM_LambdaMatrix)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ScanEigenfrequencies(benchmark::State& state) {
  const qeflab::KernelContext ctx(fixture());
  qeflab::ScanOptions opts = qeflab::default_scan(ctx);
  opts.samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qeflab::scan_eigenfrequencies(ctx, opts));
}
BENCHMARK(BM_ScanEigenfrequencies)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_NystromOracle(benchmark::State& state) {
  const qeflab::KernelContext ctx(fixture());
  const qeflab::Grid grid = qeflab::make_grid(1.0, static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(qeflab::nystrom_oracle(ctx, grid).eigenvalues);
}
BENCHMARK(BM_NystromOracle)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_PkEigenvalues(benchmark::State& state) {
  const qeflab::KernelContext ctx(fixture());
  const qeflab::Grid grid = qeflab::make_grid(1.0, 8, 16);
  qeflab::BasisOptions opts;
  opts.scan = qeflab::default_scan(ctx);
  const auto basis = qeflab::build_basis(ctx, grid, opts);
  const auto st = qeflab::solve_state_ale(ctx.drift(), ctx.system().dispersion);
  const qeflab::QefOperators ops(ctx, basis, st);
  for (auto _ : state) benchmark::DoNotOptimize(ops.pk_eigenvalues(1.0));
}
BENCHMARK(BM_PkEigenvalues)->Unit(benchmark::kMillisecond);

void BM_FockAverage(benchmark::State& state) {
  const auto pair = qeflab::build_pair(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qeflab::gaussian_average(pair, 0.6, 20));
}
BENCHMARK(BM_FockAverage)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
