// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/k_select.hpp"
#include "ktlb/kaligned_mmu.hpp"
#include "ktlb/report.hpp"
#include "ktlb/simulation.hpp"
#include "ktlb/sweep.hpp"
#include "ktlb/trace.hpp"

using namespace ktlb;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared setting for the mixed-mapping criteria.
constexpr std::uint64_t kMixedPages = 1 << 18;
constexpr std::uint64_t kMixedAccesses = 1'000'000;
constexpr int kSeeds = 10;

AccessTrace sequential_over(const PageTable& pt) {
  AccessTrace t;
  for (const auto& [v, m] : pt) t.records.push_back({v << kPageShift, TraceOp::kRead});
  return t;
}

void oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const ContiguityKind kinds[] = {ContiguityKind::kSmall, ContiguityKind::kMedium,
                                  ContiguityKind::kLarge, ContiguityKind::kMixed};
  const TracePattern patterns[] = {TracePattern::kZipf, TracePattern::kRandom,
                                   TracePattern::kSequential, TracePattern::kStrided,
                                   TracePattern::kZipf};
  constexpr int kMappings = 10;
  std::vector<PageTable> maps(kMappings);
  std::vector<AccessTrace> traces(kMappings);
  for (int i = 0; i < kMappings; ++i) {
    maps[i] = generate_synthetic_mapping(kinds[i % 4], 100'000, 100 + i,
                                         i % 3 == 2 ? Placement::kPacked : Placement::kSizeClass);
    TraceOptions o;
    o.pattern = patterns[i % 5];
    o.length = 1'000'000;
    o.seed = 200 + i;
    traces[i] = generate_trace(maps[i], o);
  }
  const auto schemes = all_schemes();
  const long n = kMappings * static_cast<long>(schemes.size());
  std::vector<std::uint64_t> mismatches(n), accesses(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long j = 0; j < n; ++j) {
    SimConfig c;
    c.scheme = schemes[j % schemes.size()];
    c.verify = true;
    c.coverage_interval = 0;
    const SimReport r = run_simulation(maps[j / schemes.size()], traces[j / schemes.size()], c);
    mismatches[j] = r.mismatches;
    accesses[j] = r.accesses;
  }
  std::uint64_t bad = 0, total = 0;
  for (long j = 0; j < n; ++j) {
    bad += mismatches[j];
    total += accesses[j];
  }
  std::uint64_t smallest = maps[0].size();
  for (const auto& m : maps) smallest = std::min<std::uint64_t>(smallest, m.size());
  const double secs = seconds_since(t0);
  report("oracle-equivalence", bad == 0 && secs < 120.0,
         fmt("%d mappings (>= %llu pages), %zu schemes, %llu translations, %llu mismatches, %.1f s",
             kMappings, static_cast<unsigned long long>(smallest), schemes.size(),
             static_cast<unsigned long long>(total), static_cast<unsigned long long>(bad), secs));
}

void k_worked_example() {
  const ContiguityHistogram h{{{3, 10}, {16, 100}, {40, 5}, {128, 50}}};
  const AlignmentSet K = determine_K(h, 0.9, 4);
  std::ostringstream s;
  for (unsigned k : K.widths()) s << k << ' ';
  report("k-worked-example", K == AlignmentSet({4, 7}), "K = { " + s.str() + "}");
}

void single_chunk_reach() {
  std::string detail;
  bool ok = true;
  for (unsigned k : {4u, 6u, 8u}) {
    const std::uint64_t n = std::uint64_t{1} << k;
    PageTable pt;
    for (std::uint64_t i = 0; i < n; ++i) pt.map(5 * n + i, 9 * n + i);
    SimConfig c;
    c.widths = AlignmentSet({k});
    c.verify = true;
    const SimReport r = run_simulation(pt, sequential_over(pt), c);
    ok = ok && r.walks == 1 && r.mismatches == 0;
    detail += fmt("k=%u walks=%llu ", k, static_cast<unsigned long long>(r.walks));
  }
  report("single-chunk-reach", ok, detail);
}

void latency_arithmetic() {
  // vpn 0-1, 4-6 and 8-13 as three chunks; K = {2, 3}. After 13 and 12 the
  // predictor holds 3; 5 fills a 2-bit entry; 6 then hits on the 2nd probe.
  PageTable pt;
  for (Vpn v = 0; v < 2; ++v) pt.map(v, 20 + v);
  for (Vpn v = 4; v < 7; ++v) pt.map(v, 26 + v);
  for (Vpn v = 8; v < 14; ++v) pt.map(v, 2 + v);
  AccessTrace t;
  for (Vpn v : {13u, 12u, 5u, 6u}) t.records.push_back({v << kPageShift, TraceOp::kRead});
  SimConfig c;
  c.widths = AlignmentSet({2, 3});
  const SimReport all = run_simulation(pt, t, c);
  AccessTrace prefix = t;
  prefix.records.pop_back();
  const SimReport head = run_simulation(pt, prefix, c);
  const std::uint64_t cost = all.total_cycles - head.total_cycles;
  report("latency-arithmetic", cost == 15 && all.hits_by_lookup[2] == 1,
         fmt("second-probe hit costs %llu cycles", static_cast<unsigned long long>(cost)));
}

void thp_null_result() {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kSmall, kMixedPages, 1);
  TraceOptions o;
  o.length = kMixedAccesses;
  const AccessTrace t = generate_trace(pt, o);
  SimConfig c;
  c.scheme = SchemeId::kBase;
  const auto base = run_simulation(pt, t, c).walks;
  c.scheme = SchemeId::kThp;
  const auto thp = run_simulation(pt, t, c).walks;
  report("thp-small-null", thp == base,
         fmt("base walks %llu, thp walks %llu", static_cast<unsigned long long>(base),
             static_cast<unsigned long long>(thp)));
}

struct SeedResult {
  std::uint64_t base = 0, anchor = 0, anchor_distance = 0;
  std::uint64_t k[3] = {};
  bool coverage_monotone = true;
  double zipf_acc[3] = {};
  double seq_acc[3] = {};
  double alt_acc[3] = {};
};

void mixed_criteria() {
  std::vector<SeedResult> res(kSeeds);
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < kSeeds; ++s) {
    const std::uint64_t seed = s + 1;
    SeedResult& out = res[s];
    const PageTable pt = generate_synthetic_mapping(ContiguityKind::kMixed, kMixedPages, seed);
    TraceOptions o;
    o.length = kMixedAccesses;
    o.seed = seed;
    const AccessTrace zipf = generate_trace(pt, o);
    o.pattern = TracePattern::kSequential;
    const AccessTrace seq = generate_trace(pt, o);
    o.pattern = TracePattern::kAlternating;
    o.widths = AlignmentSet({6, 9});
    const AccessTrace alt = generate_trace(pt, o);

    SimConfig c;
    c.scheme = SchemeId::kBase;
    out.base = run_simulation(pt, zipf, c).walks;
    c.scheme = SchemeId::kAnchorStatic;
    const SimReport a = run_simulation(pt, zipf, c);
    out.anchor = a.walks;
    out.anchor_distance = a.anchor_distance;

    c.scheme = SchemeId::kKAligned;
    std::vector<SimReport> ks;
    for (int i = 0; i < 3; ++i) {
      c.psi = 2 + i;
      ks.push_back(run_simulation(pt, zipf, c));
      out.k[i] = ks.back().walks;
      out.zipf_acc[i] = ks.back().predictor_accuracy().value_or(0.0);
      out.seq_acc[i] = run_simulation(pt, seq, c).predictor_accuracy().value_or(0.0);
      out.alt_acc[i] = run_simulation(pt, alt, c).predictor_accuracy().value_or(1.0);
    }
    for (std::size_t j = 0; j < ks[0].coverage_samples.size(); ++j) {
      out.coverage_monotone = out.coverage_monotone &&
                              ks[0].coverage_samples[j] <= ks[1].coverage_samples[j] &&
                              ks[1].coverage_samples[j] <= ks[2].coverage_samples[j];
    }
    out.coverage_monotone = out.coverage_monotone && !ks[0].coverage_samples.empty();
  }

  int ordered = 0, monotone = 0;
  std::string failed_seeds;
  double min_acc = 1.0, max_alt = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const SeedResult& r = res[s];
    const bool ok = r.k[0] < r.anchor && r.anchor < r.base && r.k[2] <= r.k[1] && r.k[1] <= r.k[0];
    ordered += ok;
    monotone += r.coverage_monotone;
    std::printf("  seed %d: base %llu anchor-static %llu (d=%llu) K2 %llu K3 %llu K4 %llu%s\n", s + 1,
                static_cast<unsigned long long>(r.base), static_cast<unsigned long long>(r.anchor),
                static_cast<unsigned long long>(r.anchor_distance),
                static_cast<unsigned long long>(r.k[0]), static_cast<unsigned long long>(r.k[1]),
                static_cast<unsigned long long>(r.k[2]), ok ? "" : "  <- out of order");
    if (!ok) failed_seeds += fmt(" %d", s + 1);
    for (int i = 0; i < 3; ++i) {
      min_acc = std::min({min_acc, r.zipf_acc[i], r.seq_acc[i]});
      max_alt = std::max(max_alt, r.alt_acc[i]);
    }
  }
  report("mixed-ordering", ordered >= 9,
         fmt("ordering holds on %d of %d seeds%s%s", ordered, kSeeds,
             failed_seeds.empty() ? "" : "; fails on seed", failed_seeds.c_str()));
  report("coverage-monotonicity", monotone == kSeeds,
         fmt("non-decreasing in |K| at every sample on %d of %d seeds", monotone, kSeeds));
  report("predictor-effectiveness", min_acc >= 0.80 && max_alt < 0.55,
         fmt("min first-probe fraction (zipf, sequential, |K|=2..4) %.4f; max on alternating %.4f",
             min_acc, max_alt));
}

void churn_consistency() {
  PageTable pt = generate_synthetic_mapping(ContiguityKind::kMixed, kMixedPages, 3);
  const AlignmentSet K = determine_K(build_histogram(scan_contiguity_chunks(pt)), 0.9, 4);
  AnnotationStore store = annotate_table(pt, K).store;
  std::vector<Vpn> pages;
  for (const auto& [v, m] : pt) pages.push_back(v);
  std::mt19937_64 rng(77);
  std::shuffle(pages.begin(), pages.end(), rng);
  constexpr int kEvents = 10'000;
  for (int i = 0; i < kEvents; ++i) update_on_unmap(pt, store, pages[i]);

  std::uint64_t bad = 0;
  for (const auto& a : store.annotations()) bad += a.contiguity != compute_contiguity(pt, a.vpn, a.width);
  const AnnotationStore fresh = annotate_table_serial(pt, K).store;
  for (const auto& f : fresh.annotations()) {
    const AlignedAnnotation* s = store.find(f.vpn);
    bad += s == nullptr || !(*s == f);
  }

  // The same churn inside a simulation, every translation checked.
  const PageTable sim_pt = generate_synthetic_mapping(ContiguityKind::kMixed, kMixedPages, 4);
  TraceOptions o;
  o.length = 1'000'000;
  o.unmap_every = 100;
  const AccessTrace t = generate_trace(sim_pt, o);
  SimConfig c;
  c.verify = true;
  const SimReport r = run_simulation(sim_pt, t, c);
  report("churn-consistency", bad == 0 && r.mismatches == 0 && r.unmap_events == kEvents,
         fmt("%d unmaps: %llu stale annotations of %zu; simulated %llu unmaps, %llu mismatches",
             kEvents, static_cast<unsigned long long>(bad), store.size(),
             static_cast<unsigned long long>(r.unmap_events),
             static_cast<unsigned long long>(r.mismatches)));
}

void sweep_determinism() {
  SweepSpec spec;
  for (auto kind : {ContiguityKind::kSmall, ContiguityKind::kMixed}) {
    for (std::uint64_t seed : {1, 2}) {
      WorkloadSpec w;
      w.name = std::string(to_string(kind)) + "-s" + std::to_string(seed);
      w.kind = kind;
      w.pages = 50'000;
      w.map_seed = seed;
      w.trace.length = 100'000;
      w.trace.seed = seed;
      spec.workloads.push_back(w);
    }
  }
  for (SchemeId s : all_schemes()) {
    if (s != SchemeId::kAnchor) spec.schemes.push_back(s);
  }
  spec.k_settings = {{std::nullopt, 2}, {std::nullopt, 3}, {std::nullopt, 4}};
  const auto csv = [&](unsigned jobs) {
    spec.jobs = jobs;
    std::ostringstream out;
    write_report(out, run_sweep(spec));
    return out.str();
  };
  const std::string a = csv(1), b = csv(1), c = csv(4);
  report("sweep-determinism", a == b && a == c && !a.empty(),
         fmt("%zu-byte CSV identical across two serial runs and a 4-job run", a.size()));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> checks = {
      oracle_equivalence, k_worked_example, single_chunk_reach, latency_arithmetic,
      thp_null_result,    mixed_criteria,   churn_consistency,  sweep_determinism};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report("exception", false, e.what());
    }
  }
  std::printf("%d failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
