#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ktlb/baselines.hpp"
#include "ktlb/simulation.hpp"

using namespace ktlb;

namespace {

AccessTrace trace_of(const std::vector<Vpn>& pages, int passes = 1) {
  AccessTrace t;
  for (int p = 0; p < passes; ++p) {
    for (Vpn v : pages) t.records.push_back({v << kPageShift, TraceOp::kRead});
  }
  return t;
}

AccessTrace sequential(const PageTable& pt, int passes = 1) {
  std::vector<Vpn> pages;
  for (const auto& [v, m] : pt) pages.push_back(v);
  return trace_of(pages, passes);
}

SimReport run(const PageTable& pt, const AccessTrace& t, SchemeId s, std::uint64_t distance = 16) {
  SimConfig c;
  c.scheme = s;
  c.anchor_distance = distance;
  c.verify = true;
  c.coverage_interval = 0;
  SimReport r = run_simulation(pt, t, c);
  REQUIRE(r.mismatches == 0);
  return r;
}

// `count` chunks of `size` pages laid end to end in virtual space, each
// physically separate.
PageTable abutting(std::uint64_t count, std::uint64_t size) {
  PageTable pt;
  for (std::uint64_t c = 0; c < count; ++c) {
    for (std::uint64_t i = 0; i < size; ++i) pt.map(c * size + i, (1u << 24) + c * size * 3 + i);
  }
  return pt;
}

}  // namespace

TEST_CASE("base: one repeated page walks once") {
  const PageTable pt = fixtures::run_table(5, 1, 9);
  const SimReport r = run(pt, trace_of({5}, 100), SchemeId::kBase);
  CHECK(r.walks == 1);
  CHECK(r.total_cycles == 50);
}

TEST_CASE("base: streaming past capacity misses on the second pass") {
  PageTable pt;
  for (Vpn v = 0; v < 2048; ++v) pt.map(v * 2, v * 5);
  const SimReport r = run(pt, sequential(pt, 2), SchemeId::kBase);
  CHECK(r.walks >= 2048 + 1024);
}

TEST_CASE("thp: small contiguity gains nothing") {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kSmall, 50000, 3);
  BaseMmu thp(pt, true);
  CHECK(thp.promoted_regions() == 0);
  TraceOptions o;
  o.length = 200000;
  const AccessTrace t = generate_trace(pt, o);
  CHECK(run(pt, t, SchemeId::kThp).walks == run(pt, t, SchemeId::kBase).walks);
}

TEST_CASE("thp: one aligned 512-page chunk walks once") {
  const PageTable pt = fixtures::run_table(1024, 512, 2048);
  CHECK(run(pt, sequential(pt), SchemeId::kThp).walks == 1);
  CHECK(run(pt, sequential(pt), SchemeId::kBase).walks == 512);
}

TEST_CASE("thp: only the aligned interior of a 700-page chunk promotes") {
  const PageTable pt = fixtures::run_table(512, 700, 512 + 4096);
  BaseMmu thp(pt, true);
  CHECK(thp.promoted_regions() == 1);
  CHECK(thp.promoted(600));
  CHECK_FALSE(thp.promoted(1100));
  CHECK(run(pt, sequential(pt), SchemeId::kThp).walks == 1 + (700 - 512));
}

TEST_CASE("thp: a physically misaligned run does not promote") {
  const PageTable pt = fixtures::run_table(512, 1024, 4097);
  CHECK_FALSE(promotable(pt, 512));
  CHECK(BaseMmu(pt, true).promoted_regions() == 0);
}

TEST_CASE("thp: unmapping splits the huge page") {
  PageTable pt = fixtures::run_table(0, 512, 0);
  BaseMmu thp(pt, true);
  CHECK(thp.promoted(3));
  pt.unmap(7);
  thp.page_unmapped(7);
  CHECK_FALSE(thp.promoted(3));
  CHECK(thp.translate(3).ppn == 3);
}

TEST_CASE("colt: an aligned 8-page chunk walks once") {
  const PageTable pt = fixtures::run_table(64, 8, 300);
  CHECK(run(pt, sequential(pt), SchemeId::kColt).walks == 1);
}

TEST_CASE("colt and cluster: aligned region walks once per 8 pages") {
  for (std::uint64_t n : {8u, 64u, 256u, 800u}) {
    const PageTable pt = fixtures::run_table(1024, n, 77);
    CHECK(run(pt, sequential(pt), SchemeId::kColt).walks == (n + 7) / 8);
    CHECK(run(pt, sequential(pt), SchemeId::kCluster).walks == (n + 7) / 8);
  }
}

TEST_CASE("colt: a 256-page chunk needs 32 entries") {
  const PageTable pt = fixtures::run_table(0, 256, 1000);
  ColtMmu colt(pt);
  std::uint64_t walks = 0;
  for (const auto& [v, m] : pt) walks += colt.translate(v).walk_performed();
  CHECK(walks == 32);
  CHECK(colt.coverage() == 256);
}

TEST_CASE("colt and cluster: no contiguity degenerates to base") {
  PageTable pt;
  for (Vpn v = 0; v < 500; ++v) pt.map(v, 7 * v + 3);
  const AccessTrace t = sequential(pt, 2);
  const auto base = run(pt, t, SchemeId::kBase).walks;
  CHECK(base == 500);
  CHECK(run(pt, t, SchemeId::kColt).walks == base);
  CHECK(run(pt, t, SchemeId::kCluster).walks == base);
}

TEST_CASE("cluster: array capacities") {
  const PageTable pt = fixtures::run_table(0, 8, 0);
  ClusterMmu c(pt);
  CHECK(c.regular_array().capacity() == 768);
  CHECK(c.regular_array().ways() == 6);
  CHECK(c.clustered_array().capacity() == 320);
  CHECK(c.clustered_array().ways() == 5);
}

TEST_CASE("cluster: pages sharing a displacement group without adjacency") {
  PageTable pt;
  for (Vpn v : {16u, 18u, 21u}) pt.map(v, 400 + v);
  pt.map(17, 5);
  ClusterMmu c(pt);
  CHECK(c.translate(18).fill == FillKind::kCoalesced);
  c.translate(17);
  CHECK(c.regular_array().valid_entries() == 1);
  const Translation t = c.translate(21);
  CHECK(t.outcome == Outcome::kCoalescedHit);
  CHECK(t.ppn == 421);
}

TEST_CASE("rmm: a 1024-page chunk walks once") {
  const PageTable pt = fixtures::run_table(4096, 1024, 99);
  const SimReport r = run(pt, sequential(pt), SchemeId::kRmm);
  CHECK(r.walks == 1);
  CHECK(r.coalesced_hits == 1023);
}

TEST_CASE("rmm: 64 large chunks round robin thrash 32 ranges") {
  const PageTable pt = fixtures::uniform_table(64, 600, 1024);
  std::vector<Vpn> pages;
  for (std::uint64_t r = 0; r < 50; ++r) {
    for (std::uint64_t c = 0; c < 64; ++c) pages.push_back(c * 1024 + r);
  }
  const SimReport rmm = run(pt, trace_of(pages), SchemeId::kRmm);
  CHECK(rmm.walks == pages.size());
  const PageTable half = fixtures::uniform_table(32, 600, 1024);
  std::vector<Vpn> fits;
  for (Vpn p : pages) {
    if (p < 32 * 1024) fits.push_back(p);
  }
  CHECK(run(half, trace_of(fits), SchemeId::kRmm).walks == 32);
}

TEST_CASE("rmm: small contiguity stays close to base") {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kSmall, 50000, 5);
  TraceOptions o;
  o.length = 200000;
  const AccessTrace t = generate_trace(pt, o);
  const auto base = run(pt, t, SchemeId::kBase).walks;
  const auto rmm = run(pt, t, SchemeId::kRmm).walks;
  CHECK(rmm <= base);
}

TEST_CASE("range tlb replaces the least recently used range") {
  RangeTlb r(2);
  r.insert({0, 10, 100});
  r.insert({20, 10, 200});
  CHECK(r.probe(5) != nullptr);
  r.insert({40, 10, 300});
  CHECK(r.probe(25) == nullptr);
  CHECK(r.probe(45)->ppn == 300);
  CHECK(r.coverage() == 20);
}

TEST_CASE("large contiguity: thp and rmm beat base") {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kLarge, 1 << 18, 2);
  TraceOptions o;
  o.length = 300000;
  const AccessTrace t = generate_trace(pt, o);
  const auto base = run(pt, t, SchemeId::kBase).walks;
  CHECK(run(pt, t, SchemeId::kThp).walks < base);
  CHECK(run(pt, t, SchemeId::kRmm).walks < base);
}

TEST_CASE("anchor: aligned 16-page chunks coalesce fully") {
  const PageTable pt = abutting(200, 16);
  CHECK(run(pt, sequential(pt), SchemeId::kAnchor, 16).walks == 200);
}

TEST_CASE("anchor: a chunk larger than the distance uses several anchors") {
  const PageTable pt = fixtures::run_table(0, 64, 500);
  CHECK(run(pt, sequential(pt), SchemeId::kAnchor, 16).walks == 4);
}

TEST_CASE("anchor: a misaligned small chunk is not coalesced") {
  const PageTable pt = fixtures::run_table(4, 8, 500);
  CHECK(run(pt, sequential(pt), SchemeId::kAnchor, 16).walks == 8);
}

TEST_CASE("anchor: distance validation") {
  const PageTable pt = fixtures::run_table(0, 8, 0);
  CHECK_THROWS_AS(AnchorMmu(pt, 12), ConfigError);
  CHECK_THROWS_AS(AnchorMmu(pt, 1), ConfigError);
  CHECK_THROWS_AS(AnchorMmu(pt, 4096), ConfigError);
  CHECK(AnchorMmu(pt, 2048).distance() == 2048);
  CHECK(anchor_distances().size() == 11);
}

TEST_CASE("anchor: entry estimate") {
  CHECK(anchor_entry_estimate({{{16, 1}}}, 16) == doctest::Approx(8.5));
  CHECK(anchor_entry_estimate({{{1, 10}}}, 64) == doctest::Approx(10.0));
  // 2000-page chunks: about (d-1)/2 + 2000/d entries each, least at 64.
  CHECK(select_anchor_distance({{{2000, 100}}}) == 64);
  CHECK(select_anchor_distance({{{2, 100}}}) == 2);
}

TEST_CASE("anchor static search: uniform chunk sizes") {
  TraceOptions o;
  o.length = 200000;
  for (std::uint64_t size : {16u, 512u}) {
    const PageTable pt = abutting(size == 16 ? 8192 : 256, size);
    const AccessTrace t = generate_trace(pt, o);
    SimConfig c;
    const AnchorSearch s = anchor_static_search(pt, t, c);
    CHECK(s.best_distance == size);
    CHECK(s.walks.size() == 11);
    CHECK(anchor_static_search(pt, t, c, false).walks == s.walks);
  }
}

TEST_CASE("anchor dynamic picks a distance from the histogram") {
  const PageTable pt = abutting(64, 1024);
  AnchorMmu a(pt);
  CHECK(a.name() == "anchor-dynamic");
  CHECK(a.distance() == select_anchor_distance(build_histogram(scan_contiguity_chunks(pt))));
  CHECK_FALSE(a.reevaluate());
}

TEST_CASE("every scheme agrees with the page table under churn") {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kMixed, 60000, 12);
  TraceOptions o;
  o.length = 150000;
  o.unmap_every = 500;
  const AccessTrace t = generate_trace(pt, o);
  for (SchemeId s : all_schemes()) {
    SimConfig c;
    c.scheme = s;
    c.verify = true;
    c.psi = 3;
    const SimReport r = run_simulation(pt, t, c);
    CHECK(r.mismatches == 0);
    CHECK(r.unmap_events == t.event_count());
    CHECK(r.accesses == t.access_count());
  }
}
