// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/simulation.hpp"
#include "ktlb/sweep.hpp"
#include "ktlb/trace.hpp"

using namespace ktlb;

namespace {

const PageTable& mixed_table() {
  static const PageTable pt = generate_synthetic_mapping(ContiguityKind::kMixed, 1 << 20, 1);
  return pt;
}

const AccessTrace& zipf_trace() {
  static const AccessTrace t = [] {
    TraceOptions o;
    o.length = 200000;
    return generate_trace(mixed_table(), o);
  }();
  return t;
}

void BM_AnnotateSerial(benchmark::State& state) {
  const AlignmentSet K({4, 6, 9});
  mixed_table();
  for (auto _ : state) benchmark::DoNotOptimize(annotate_table_serial(mixed_table(), K).work);
}

void BM_AnnotateParallel(benchmark::State& state) {
  const AlignmentSet K({4, 6, 9});
  mixed_table();
  for (auto _ : state) benchmark::DoNotOptimize(annotate_table(mixed_table(), K).work);
  state.counters["threads"] = omp_get_max_threads();
}

void BM_AnchorSearch(benchmark::State& state) {
  const SimConfig c;
  const bool parallel = state.range(0) != 0;
  zipf_trace();
  for (auto _ : state) {
    benchmark::DoNotOptimize(anchor_static_search(mixed_table(), zipf_trace(), c, parallel).best_distance);
  }
}

void BM_Sweep(benchmark::State& state) {
  SweepSpec spec;
  for (ContiguityKind k : {ContiguityKind::kSmall, ContiguityKind::kMedium, ContiguityKind::kLarge,
                           ContiguityKind::kMixed}) {
    WorkloadSpec w;
    w.name = std::string(to_string(k));
    w.kind = k;
    w.pages = 1 << 16;
    w.trace.length = 100000;
    spec.workloads.push_back(w);
  }
  spec.schemes = {SchemeId::kBase, SchemeId::kThp, SchemeId::kColt, SchemeId::kRmm, SchemeId::kKAligned};
  spec.jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec).size());
}

}  // namespace

BENCHMARK(BM_AnnotateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnnotateParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnchorSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
