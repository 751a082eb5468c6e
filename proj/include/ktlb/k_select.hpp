#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/memory_map.hpp"

namespace ktlb {

/// One row of the size-range table: chunk sizes in [lo, hi] use `width`.
struct SizeRange {
  std::uint64_t lo;
  std::uint64_t hi;  // inclusive; UINT64_MAX for the open last row
  unsigned width;
};

/// The size-range table, ascending and covering [2, inf).
std::span<const SizeRange> size_range_table();

/// Alignment width matching a chunk size; none for a single page.
std::optional<unsigned> size_to_alignment(std::uint64_t size);

/// Covered pages per alignment width.
using AlignmentWeight = std::map<unsigned, std::uint64_t>;

AlignmentWeight alignment_weights(const ContiguityHistogram& h);

/// Greedy selection of K: widths are taken by descending covered pages (ties
/// prefer the larger width) until the cumulative coverage exceeds
/// theta * total contiguous pages or |K| reaches psi. Single-page chunks are
/// excluded from both the weights and the total.
AlignmentSet determine_K(const ContiguityHistogram& h, double theta = 0.9, unsigned psi = 4);

struct Reevaluation {
  AlignmentSet K;
  /// K changed: annotations must be rebuilt and TLBs flushed.
  bool changed = false;
};

Reevaluation reevaluate_K(const AlignmentSet& current, const ContiguityHistogram& h,
                          bool interval_elapsed);

}  // namespace ktlb
