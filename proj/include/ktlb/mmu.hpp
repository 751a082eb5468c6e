#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "ktlb/memory_map.hpp"
#include "ktlb/tlb_core.hpp"

namespace ktlb {

enum class Outcome : std::uint8_t {
  kL1Hit,
  kL2Hit,         // regular (7-cycle class) L2 hit, including COLT and huge entries
  kCoalescedHit,  // aligned, anchor, cluster or range hit (8-cycle class)
  kWalk,          // page-table walk
};

enum class FillKind : std::uint8_t { kNone, kRegular, kAligned, kHuge, kCoalesced, kRange };

/// Result of one translation. `lookups` is the number of coalesced-entry
/// probes performed: the probe that hit for kCoalescedHit, or the probes that
/// preceded the walk for kWalk.
struct Translation {
  Ppn ppn = 0;
  Outcome outcome = Outcome::kWalk;
  unsigned lookups = 0;
  FillKind fill = FillKind::kNone;
  unsigned fill_width = 0;

  bool walk_performed() const { return outcome == Outcome::kWalk; }
};

/// Thrown by a walk that finds no mapping.
class UnmappedPageError : public Error {
 public:
  explicit UnmappedPageError(Vpn vpn);
  Vpn vpn() const { return vpn_; }

 private:
  Vpn vpn_;
};

/// L1 TLB shared by every scheme: 4 KiB 64 entries 4-way, 2 MiB 32 entries
/// 4-way. Schemes without huge pages leave the 2 MiB array empty.
struct L1Tlb {
  TlbArray small = TlbArray::with_entries(64, 4);
  TlbArray huge = TlbArray::with_entries(32, 4);

  void flush() {
    small.flush();
    huge.flush();
  }
};

inline constexpr std::uint64_t kL2Entries = 1024;
inline constexpr unsigned kL2Ways = 8;

/// A translation scheme. An instance owns its TLB state and reads the page
/// table it was built over; it is used by one thread at a time.
class Mmu {
 public:
  explicit Mmu(const PageTable& pt) : pt_(&pt) {}
  virtual ~Mmu() = default;
  Mmu(const Mmu&) = delete;
  Mmu& operator=(const Mmu&) = delete;

  virtual std::string name() const = 0;

  /// Translates a mapped VPN. Throws UnmappedPageError when a walk finds no
  /// mapping.
  virtual Translation translate(Vpn vpn) = 0;

  /// Invalidates every TLB entry.
  virtual void flush() = 0;

  /// The page table just lost `vpn`: refresh derived state and flush.
  virtual void page_unmapped(Vpn vpn) = 0;

  /// Periodic re-evaluation hook (for example re-selecting K). Returns true
  /// when the configuration changed and TLBs were flushed.
  virtual bool reevaluate() { return false; }

  /// Pages translatable from the current L2-level contents.
  virtual std::uint64_t coverage() const = 0;

  /// One-time initialization work (annotations written), 0 if none.
  virtual std::uint64_t init_work() const { return 0; }

  const L1Tlb& l1() const { return l1_; }

 protected:
  const PageMapping& walk(Vpn vpn) const;

  const PageTable* pt_;
  L1Tlb l1_;
};

}  // namespace ktlb
