#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "ktlb/types.hpp"

namespace ktlb {

enum class EntryKind : std::uint8_t {
  kRegular,    // one 4 KiB page
  kAligned,    // aligned/anchor entry: covers offsets below `contiguity`
  kHuge,       // one 2 MiB page, tag is the 512-aligned VPN
  kCoalesced,  // 8-page block with a presence sub-map (COLT, Cluster)
};

struct TlbEntry {
  Vpn tag_vpn = 0;
  /// Frame of tag_vpn itself; the frame of a covered page is ppn + offset.
  Ppn ppn = 0;
  EntryKind kind = EntryKind::kRegular;
  /// Alignment width for kAligned entries; first covered offset for
  /// kCoalesced entries, so several groups of one block can coexist.
  std::uint8_t width = 0;
  /// Covered offsets within the 8-page block for kCoalesced entries.
  std::uint8_t submap = 0;
  /// Covered pages including the entry itself; 0 for regular entries.
  std::uint64_t contiguity = 0;
  bool valid = false;
  std::uint64_t lru_stamp = 0;

  static TlbEntry regular(Vpn vpn, Ppn ppn) {
    return {vpn, ppn, EntryKind::kRegular, 0, 0, 0, true, 0};
  }
  static TlbEntry aligned(Vpn vpn, Ppn ppn, unsigned width, std::uint64_t contiguity) {
    return {vpn, ppn, EntryKind::kAligned, static_cast<std::uint8_t>(width), 0, contiguity,
            true, 0};
  }
  static TlbEntry huge(Vpn vpn, Ppn ppn) {
    return {vpn, ppn, EntryKind::kHuge, 0, 0, std::uint64_t{1} << kHugeShift, true, 0};
  }
  static TlbEntry coalesced(Vpn block, Ppn block_ppn, std::uint8_t submap) {
    return {block,
            block_ppn,
            EntryKind::kCoalesced,
            static_cast<std::uint8_t>(std::countr_zero(submap)),
            submap,
            static_cast<std::uint64_t>(std::popcount(submap)),
            true,
            0};
  }

  bool covers(Vpn vpn) const {
    if (vpn < tag_vpn) return false;
    const std::uint64_t offset = vpn - tag_vpn;
    switch (kind) {
      case EntryKind::kRegular: return offset == 0;
      case EntryKind::kAligned: return offset < contiguity;
      case EntryKind::kHuge: return offset < (std::uint64_t{1} << kHugeShift);
      case EntryKind::kCoalesced: return offset < 8 && ((submap >> offset) & 1u);
    }
    return false;
  }
  /// Frame for a covered VPN.
  Ppn translate(Vpn vpn) const { return ppn + (vpn - tag_vpn); }
  /// Pages this entry translates: 1 for a regular entry, else its contiguity.
  std::uint64_t coverage() const {
    return kind == EntryKind::kRegular ? 1 : contiguity;
  }
};

/// Set index of `vpn` in an array with `sets` sets whose index bits start
/// `k_hat` bits above the page offset.
constexpr std::uint64_t index_of(Vpn vpn, std::uint64_t sets, unsigned k_hat) {
  return (vpn >> k_hat) & (sets - 1);
}

struct TlbStats {
  std::uint64_t probes = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t inserts = 0;
  std::uint64_t evictions = 0;
};

/// Set-associative translation array with exact LRU replacement.
class TlbArray {
 public:
  /// `sets` must be a power of two. Entries of all kinds share one index
  /// function; huge entries index by their 2 MiB page number.
  TlbArray(std::uint64_t sets, unsigned ways, unsigned index_shift = 0);

  static TlbArray with_entries(std::uint64_t entries, unsigned ways, unsigned index_shift = 0) {
    return TlbArray(entries / ways, ways, index_shift);
  }

  std::uint64_t sets() const { return sets_; }
  unsigned ways() const { return ways_; }
  std::uint64_t capacity() const { return sets_ * ways_; }
  unsigned index_shift() const { return index_shift_; }
  /// Changes the index function; all entries are invalidated.
  void set_index_shift(unsigned shift);

  std::uint64_t set_of(Vpn tag_vpn, EntryKind kind) const {
    const unsigned size_shift = kind == EntryKind::kHuge ? kHugeShift : 0;
    return index_of(tag_vpn >> size_shift, sets_, index_shift_);
  }

  /// Looks up the valid entry with this tag, kind and width. A hit refreshes
  /// its LRU stamp. Every call counts as one probe.
  const TlbEntry* probe(Vpn tag_vpn, EntryKind kind, unsigned width = 0);

  /// Looks up a valid entry with this tag and kind, any width, that covers
  /// `vpn`. Counts as one probe.
  const TlbEntry* probe_covering(Vpn tag_vpn, EntryKind kind, Vpn vpn);

  /// Inserts `entry`, replacing an entry with the same tag, kind and width if
  /// present, else a free way, else the LRU way. Returns the evicted entry.
  std::optional<TlbEntry> insert(TlbEntry entry);

  void flush();

  /// Sum of coverage() over valid entries.
  std::uint64_t coverage() const;
  std::uint64_t valid_entries() const;
  const std::vector<TlbEntry>& slots() const { return slots_; }
  const TlbStats& stats() const { return stats_; }

 private:
  TlbEntry* find(Vpn tag_vpn, EntryKind kind, unsigned width);

  std::uint64_t sets_;
  unsigned ways_;
  unsigned index_shift_;
  std::uint64_t clock_ = 0;
  std::vector<TlbEntry> slots_;
  TlbStats stats_;
};

}  // namespace ktlb
