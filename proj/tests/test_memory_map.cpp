#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "ktlb/memory_map.hpp"
#include "oracle.hpp"

using namespace ktlb;

namespace {

std::vector<std::uint64_t> sizes(const std::vector<ContiguityChunk>& chunks) {
  std::vector<std::uint64_t> s;
  for (const auto& c : chunks) s.push_back(c.size);
  return s;
}

ContiguityHistogram uniform_hist(std::uint64_t size, std::uint64_t freq) {
  return {{{size, freq}}};
}

}  // namespace

TEST_CASE("scan finds the three chunks of the figure table") {
  const auto chunks = scan_contiguity_chunks(fixtures::figure_table());
  CHECK(sizes(chunks) == std::vector<std::uint64_t>{2, 3, 6});
  CHECK(chunks[1].start_vpn == 4);
  CHECK(chunks[2].start_vpn == 8);
}

TEST_CASE("scan of an empty table is empty") {
  CHECK(scan_contiguity_chunks(PageTable{}).empty());
}

TEST_CASE("identity mapping is one chunk") {
  const auto chunks = scan_contiguity_chunks(fixtures::run_table(0, 777, 0));
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].size == 777);
}

TEST_CASE("a permission change breaks a chunk") {
  PageTable pt;
  for (Vpn v = 0; v < 8; ++v) pt.map(v, 100 + v, v == 3 ? Perm::parse("r--") : Perm{});
  CHECK(sizes(scan_contiguity_chunks(pt)) == std::vector<std::uint64_t>{3, 1, 4});
}

TEST_CASE("a physical gap breaks a chunk") {
  PageTable pt;
  pt.map(0, 5);
  pt.map(1, 6);
  pt.map(2, 9);
  CHECK(sizes(scan_contiguity_chunks(pt)) == std::vector<std::uint64_t>{2, 1});
}

TEST_CASE("page table rejects double map and missing unmap") {
  PageTable pt;
  pt.map(1, 1);
  CHECK_THROWS_AS(pt.map(1, 2), Error);
  CHECK_THROWS_AS(pt.unmap(2), Error);
}

TEST_CASE("scan agrees with the neighbour oracle on random tables") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    PageTable pt;
    Ppn p = 0;
    for (Vpn v = 0; v < 600; ++v) {
      if (rng() % 5 == 0) continue;
      if (rng() % 7 == 0) p += 3;
      pt.map(v, p++, rng() % 11 == 0 ? Perm::parse("r-x") : Perm{});
    }
    const auto got = scan_contiguity_chunks(pt);
    CHECK(got == oracle::chunks(pt));
    std::uint64_t total = 0;
    for (const auto& c : got) total += c.size;
    CHECK(total == pt.size());
  }
}

TEST_CASE("permission flip inside a chunk keeps the page total") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 30; ++round) {
    const std::uint64_t k = 3 + rng() % 40;
    PageTable pt;
    const Vpn flip = rng() % k;
    for (Vpn v = 0; v < k; ++v) pt.map(v, 1000 + v, v == flip ? Perm::parse("r--") : Perm{});
    std::uint64_t total = 0;
    for (const auto& c : scan_contiguity_chunks(pt)) total += c.size;
    CHECK(total == k);
  }
}

TEST_CASE("histogram of sizes 2, 3, 6") {
  const auto h = build_histogram(scan_contiguity_chunks(fixtures::figure_table()));
  CHECK(h.bins == std::vector<HistogramBin>{{2, 1}, {3, 1}, {6, 1}});
  CHECK(h.chunk_count() == 3);
  CHECK(h.page_count() == 11);
  CHECK(build_histogram({}).empty());
}

TEST_CASE("histogram of a large synthetic mapping matches a recount") {
  std::vector<ContiguityChunk> chunks;
  generate_synthetic_mapping(ContiguityKind::kSmall, 300000, 3, Placement::kPacked, &chunks);
  REQUIRE(chunks.size() > 9000);
  std::map<std::uint64_t, std::uint64_t> recount;
  std::uint64_t pages = 0;
  for (const auto& c : chunks) {
    ++recount[c.size];
    pages += c.size;
  }
  const auto h = build_histogram(chunks);
  REQUIRE(h.bins.size() == recount.size());
  auto it = recount.begin();
  for (const auto& b : h.bins) {
    CHECK(b.size == it->first);
    CHECK(b.freq == it->second);
    ++it;
  }
  CHECK(h.chunk_count() == chunks.size());
  CHECK(h.page_count() == pages);
}

TEST_CASE("classification by band") {
  CHECK(classify_contiguity(uniform_hist(32, 100)) == ContiguityKind::kSmall);
  CHECK(classify_contiguity(uniform_hist(200, 100)) == ContiguityKind::kMedium);
  CHECK(classify_contiguity(uniform_hist(700, 100)) == ContiguityKind::kLarge);
  const ContiguityHistogram split{{{40, 100}, {400, 10}, {800, 5}}};  // 4000/4000/4000
  CHECK(classify_contiguity(split) == ContiguityKind::kMixed);
  const ContiguityHistogram minor{{{32, 1}, {600, 100}}};  // small band well under 10%
  CHECK(classify_contiguity(minor) == ContiguityKind::kLarge);
  CHECK_THROWS_WITH_AS(classify_contiguity({}), "no contiguity", Error);
}

TEST_CASE("size bands") {
  CHECK(band_of(1) == SizeBand::kSmall);
  CHECK(band_of(63) == SizeBand::kSmall);
  CHECK(band_of(64) == SizeBand::kMedium);
  CHECK(band_of(511) == SizeBand::kMedium);
  CHECK(band_of(512) == SizeBand::kLarge);
}

TEST_CASE("generator is deterministic per seed") {
  for (Placement p : {Placement::kPacked, Placement::kBuddyAligned, Placement::kSizeClass}) {
    CHECK(generate_synthetic_mapping(ContiguityKind::kSmall, 100000, 7, p) ==
          generate_synthetic_mapping(ContiguityKind::kSmall, 100000, 7, p));
  }
  CHECK_FALSE(generate_synthetic_mapping(ContiguityKind::kSmall, 100000, 7) ==
              generate_synthetic_mapping(ContiguityKind::kSmall, 100000, 8));
}

TEST_CASE("large mapping has only 512-1024 page chunks") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto chunks =
        scan_contiguity_chunks(generate_synthetic_mapping(ContiguityKind::kLarge, 100000, seed));
    for (const auto& c : chunks) {
      CHECK(c.size >= 512);
      CHECK(c.size <= 1024);
    }
  }
}

TEST_CASE("small and medium mappings stay in band") {
  for (const auto& c : scan_contiguity_chunks(generate_synthetic_mapping(ContiguityKind::kSmall, 50000, 4))) {
    CHECK(band_of(c.size) == SizeBand::kSmall);
  }
  for (const auto& c : scan_contiguity_chunks(generate_synthetic_mapping(ContiguityKind::kMedium, 50000, 4))) {
    CHECK(band_of(c.size) == SizeBand::kMedium);
  }
}

TEST_CASE("mixed mapping page shares land near 0.4/0.4/0.2") {
  const auto h = build_histogram(
      scan_contiguity_chunks(generate_synthetic_mapping(ContiguityKind::kMixed, 1000000, 1)));
  const auto s = band_page_shares(h);
  CHECK(std::abs(s[0] - 0.4) <= 0.05);
  CHECK(std::abs(s[1] - 0.4) <= 0.05);
  CHECK(std::abs(s[2] - 0.2) <= 0.05);
  CHECK(classify_contiguity(h) == ContiguityKind::kMixed);
}

TEST_CASE("scan reproduces the generated chunk list") {
  for (auto kind : {ContiguityKind::kSmall, ContiguityKind::kMedium, ContiguityKind::kLarge,
                    ContiguityKind::kMixed}) {
    for (Placement p : {Placement::kPacked, Placement::kBuddyAligned, Placement::kSizeClass}) {
      std::vector<ContiguityChunk> generated;
      const PageTable pt = generate_synthetic_mapping(kind, 60000, 9, p, &generated);
      CHECK(scan_contiguity_chunks(pt) == generated);
      CHECK(pt.size() >= 60000);
    }
  }
}

TEST_CASE("placements align chunk starts") {
  std::vector<ContiguityChunk> chunks;
  generate_synthetic_mapping(ContiguityKind::kMixed, 200000, 2, Placement::kSizeClass, &chunks);
  for (const auto& c : chunks) {
    const std::uint64_t block = c.size <= 16 ? 16 : c.size <= 64 ? 64 : std::bit_ceil(c.size);
    CHECK(c.start_vpn % block == 0);
  }
  generate_synthetic_mapping(ContiguityKind::kMixed, 200000, 2, Placement::kBuddyAligned, &chunks);
  for (const auto& c : chunks) CHECK(c.start_vpn % std::bit_ceil(c.size) == 0);
}

TEST_CASE("frames are congruent to the vpn modulo 512") {
  const PageTable pt = generate_synthetic_mapping(ContiguityKind::kLarge, 20000, 6, Placement::kPacked);
  for (const auto& [v, m] : pt) CHECK(m.ppn % 512 == v % 512);
}

TEST_CASE("generator rejects tiny sizes and unknown names") {
  CHECK_THROWS_AS(generate_synthetic_mapping(ContiguityKind::kSmall, 1000, 1), ConfigError);
  CHECK_THROWS_AS(parse_contiguity_kind("huge"), ConfigError);
  CHECK_THROWS_AS(parse_placement("random"), ConfigError);
  CHECK(parse_contiguity_kind("mixed") == ContiguityKind::kMixed);
  CHECK(parse_placement("buddy") == Placement::kBuddyAligned);
}

TEST_CASE("mapping text round trip") {
  PageTable pt = fixtures::figure_table();
  pt.map(100, 7, Perm::parse("r-x"));
  std::stringstream s;
  write_mapping(s, pt);
  CHECK(read_mapping(s) == pt);
}

TEST_CASE("mapping parse errors carry line numbers") {
  std::istringstream bad("# header\n0 10 rw-\nzz 11 rw-\n");
  try {
    read_mapping(bad);
    FAIL("no error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream dup("1 1 rw-\n1 2 rw-\n");
  CHECK_THROWS_AS(read_mapping(dup), FormatError);
  std::istringstream order("2 1 rw-\n1 2 rw-\n");
  CHECK_THROWS_AS(read_mapping(order), FormatError);
  std::istringstream perm("1 1 rwz\n");
  CHECK_THROWS_AS(read_mapping(perm), Error);
}

TEST_CASE("permission strings") {
  CHECK(Perm::parse("rwx").bits == 7);
  CHECK(Perm::parse("---").bits == 0);
  CHECK(Perm::parse("r-x").str() == "r-x");
  CHECK_THROWS_AS(Perm::parse("rw"), Error);
}
