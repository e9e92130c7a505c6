#include <benchmark/benchmark.h>

#include "qcert/analysis.hpp"
#include "qcert/config.hpp"
#include "qcert/fock.hpp"
#include "qcert/lmi.hpp"
#include "qcert/solver.hpp"

namespace {

using namespace qcert;

const AnalysisConfig& config() {
  static const AnalysisConfig cfg = josephson_config();
  return cfg;
}

void BM_AssembleLmi(benchmark::State& state) {
  const auto& cfg = config();
  const ComplexMatrix P = ComplexMatrix::Identity(4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_lmi(P, 0.8165, 4.5, cfg.plant));
}
BENCHMARK(BM_AssembleLmi);

void BM_SolveFixedTau(benchmark::State& state) {
  const auto& cfg = config();
  const auto bp = build_conic_program(cfg.plant, cfg.sector, 0.8165, kappa(0.8165, cfg.sector, KappaMode::Literal),
                                      0.0, 1e-8);
  for (auto _ : state) benchmark::DoNotOptimize(solve(bp.conic));
}
BENCHMARK(BM_SolveFixedTau)->Unit(benchmark::kMillisecond);

void BM_MinimizeBound(benchmark::State& state) {
  const auto& cfg = config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_bound(cfg.plant, cfg.sector, cfg.tau1.search(), cfg.certify_options()));
  }
}
BENCHMARK(BM_MinimizeBound)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_LindbladStep(benchmark::State& state) {
  const auto& cfg = config();
  const int cutoff = static_cast<int>(state.range(0));
  const FockSpace space(2, cutoff, cutoff - 2);
  const auto ops = build_system(space, cfg.plant, cfg.nonlinearity, cfg.cost, Ordering::AsWritten);
  const LindbladIntegrator integ(ops.H, ops.Ls);
  ComplexMatrix rho = vacuum_state(space);
  for (auto _ : state) {
    rho = integ.step(rho, 1e-3);
    benchmark::DoNotOptimize(rho.data());
  }
  state.counters["dim"] = space.dim();
}
BENCHMARK(BM_LindbladStep)->Arg(4)->Arg(8)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_VerifySector(benchmark::State& state) {
  const auto& cfg = config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_sector(cfg.cost, cfg.nonlinearity, cfg.sector, cfg.sector_grid));
  }
}
BENCHMARK(BM_VerifySector)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
