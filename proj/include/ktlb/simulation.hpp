#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/memory_map.hpp"
#include "ktlb/mmu.hpp"
#include "ktlb/trace.hpp"

namespace ktlb {

enum class SchemeId {
  kBase,
  kThp,
  kColt,
  kCluster,
  kRmm,
  kAnchor,         // fixed anchor distance
  kAnchorStatic,   // best distance from an exhaustive sweep over the trace
  kAnchorDynamic,  // distance chosen from the contiguity histogram
  kKAligned,
};

std::string_view to_string(SchemeId s);
/// Throws ConfigError for an unknown name.
SchemeId parse_scheme(std::string_view name);
std::span<const SchemeId> all_schemes();

/// Cycle costs per event class.
struct LatencyModel {
  std::uint64_t l1_hit = 0;
  std::uint64_t l2_hit = 7;
  std::uint64_t coalesced_hit_first = 8;
  std::uint64_t extra_lookup = 7;
  std::uint64_t walk = 50;
  /// Charge the coalesced-entry probes that precede a walk. Turning this
  /// off models a walk that overlaps the aligned lookup.
  bool charge_probes_before_walk = true;
};

struct SimConfig {
  SchemeId scheme = SchemeId::kKAligned;
  /// Fixed K for kaligned; chosen from the histogram with theta/psi if empty.
  std::optional<AlignmentSet> widths;
  double theta = 0.9;
  unsigned psi = 4;
  std::uint64_t anchor_distance = 16;
  std::uint64_t rmm_min_range = 32;
  LatencyModel latency;
  /// Sample L2 coverage every this many accesses (0 = never).
  std::uint64_t coverage_interval = 100'000;
  /// Re-evaluate adaptive schemes every this many accesses (0 = never).
  std::uint64_t reeval_interval = 1'500'000'000;
  /// Compare every translation against the page table.
  bool verify = false;
};

/// Largest number of coalesced-entry probes in one lookup (|K| <= 8).
inline constexpr std::size_t kMaxLookups = 8;

struct SimReport {
  std::string scheme;
  std::uint64_t accesses = 0;
  std::uint64_t l1_hits = 0;
  std::uint64_t l2_hits = 0;         // regular-class L2 hits
  std::uint64_t coalesced_hits = 0;  // aligned/anchor/cluster/range hits
  /// coalesced hits by probes used; index 0 unused.
  std::array<std::uint64_t, kMaxLookups + 1> hits_by_lookup{};
  std::uint64_t walks = 0;
  /// Probe counts behind the cycle components.
  std::uint64_t first_probes = 0;
  std::uint64_t extra_lookups = 0;

  std::uint64_t cycles_l1 = 0;
  std::uint64_t cycles_l2_hit = 0;
  std::uint64_t cycles_coalesced = 0;
  std::uint64_t cycles_extra_lookup = 0;
  std::uint64_t cycles_walk = 0;
  std::uint64_t total_cycles = 0;

  double accesses_per_instruction = 0.3;
  std::vector<std::uint64_t> coverage_samples;

  std::vector<unsigned> k_set;  // descending; kaligned only
  std::uint64_t anchor_distance = 0;  // anchor schemes only
  std::uint64_t init_work = 0;
  std::uint64_t unmap_events = 0;
  std::uint64_t reevaluations = 0;
  std::uint64_t mismatches = 0;

  std::uint64_t l1_misses() const { return accesses - l1_hits; }
  double cycles_per_access() const;
  double cycles_per_instruction() const;
  double coverage_mean() const;
  /// First-probe share of coalesced hits for kaligned; none without hits.
  std::optional<double> predictor_accuracy() const;
};

/// Builds a scheme over `pt`. kAnchorStatic needs the trace for its sweep.
std::unique_ptr<Mmu> make_mmu(const PageTable& pt, const SimConfig& config,
                              const AccessTrace* trace = nullptr);

/// Replays `trace` through one scheme. Unmap records change a private copy
/// of the mapping and trigger a full shootdown. Throws TraceIntegrityError
/// with the access index on an access to an unmapped page.
SimReport run_simulation(const PageTable& pt, const AccessTrace& trace, const SimConfig& config);

/// Same replay over an already-built scheme; `pt` must be the table `mmu`
/// was constructed over and is mutated by unmap records.
SimReport replay(PageTable& pt, Mmu& mmu, const AccessTrace& trace, const SimConfig& config);

/// Cycles charged for one translation.
std::uint64_t translation_cost(const Translation& t, const LatencyModel& lat);

struct AnchorSearch {
  std::uint64_t best_distance = 0;
  /// (distance, walks) for every candidate, ascending distance.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> walks;
};

/// Simulates every candidate anchor distance over the trace and keeps the
/// one with the fewest walks; ties go to the smaller distance. Candidates run
/// in parallel when `parallel`.
AnchorSearch anchor_static_search(const PageTable& pt, const AccessTrace& trace,
                                  const SimConfig& config, bool parallel = true);

}  // namespace ktlb
