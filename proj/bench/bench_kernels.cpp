// Serial reference vs OpenMP replication kernels, and the two R solvers.

#include <benchmark/benchmark.h>

#include "support.hpp"

using namespace mmrrw;

namespace {

const MmrrwModel& queue_model() {
  static const MmrrwModel m = three_queue_mmrrw(1, 2, 1, 9.0);
  return m;
}

void BM_EstimateG(benchmark::State& st, Exec exec) {
  CompiledKernel k(queue_model());
  PathState s{{1000, 1000, 1000}, 0};
  for (auto _ : st) benchmark::DoNotOptimize(estimate_g(k, s, 500, static_cast<int>(st.range(0)), 3, exec));
  st.SetItemsProcessed(st.iterations() * st.range(0) * 500);
}

void BM_Diagnostic(benchmark::State& st, Exec exec) {
  DiagnosticParams p;
  p.reps = static_cast<int>(st.range(0));
  p.horizon = 20000;
  p.exec = exec;
  for (auto _ : st) benchmark::DoNotOptimize(recurrence_diagnostic(queue_model(), p));
  st.SetItemsProcessed(st.iterations() * st.range(0) * p.horizon);
}

void BM_ComputeR(benchmark::State& st, RMethod method) {
  std::mt19937_64 rng(11);
  const int m = static_cast<int>(st.range(0));
  QbdBlocks q;
  do q = oracle::random_qbd(rng, m, m);
  while (qbd_mean_drift(q) >= -1e-2);
  for (auto _ : st) benchmark::DoNotOptimize(compute_R(q, 1e-14, method));
}

}  // namespace

BENCHMARK_CAPTURE(BM_EstimateG, serial, Exec::Serial)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_EstimateG, parallel, Exec::Parallel)->Arg(64)->Arg(256);
BENCHMARK_CAPTURE(BM_Diagnostic, serial, Exec::Serial)->Arg(16);
BENCHMARK_CAPTURE(BM_Diagnostic, parallel, Exec::Parallel)->Arg(16);
BENCHMARK_CAPTURE(BM_ComputeR, natural, RMethod::Natural)->Arg(2)->Arg(6)->Arg(20);
BENCHMARK_CAPTURE(BM_ComputeR, log_reduction, RMethod::LogReduction)->Arg(2)->Arg(6)->Arg(20);

BENCHMARK_MAIN();
