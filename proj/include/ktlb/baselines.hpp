#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/memory_map.hpp"
#include "ktlb/mmu.hpp"

namespace ktlb {

/// Conventional two-level TLB with 4 KiB entries. With `huge_pages` it
/// becomes THP: every 512-page region that is aligned in both address
/// spaces, fully mapped, contiguous and permission-uniform is promoted to a
/// 2 MiB entry.
class BaseMmu final : public Mmu {
 public:
  BaseMmu(const PageTable& pt, bool huge_pages = false);

  std::string name() const override { return huge_pages_ ? "thp" : "base"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn vpn) override;
  std::uint64_t coverage() const override { return l2_.coverage(); }

  bool promoted(Vpn vpn) const { return promoted_.count(aligned_vpn(vpn, kHugeShift)) != 0; }
  std::size_t promoted_regions() const { return promoted_.size(); }

 private:
  bool huge_pages_;
  TlbArray l2_;
  std::unordered_set<Vpn> promoted_;  // 512-aligned VPNs
};

/// True when the 512-page region at the 512-aligned `base` can be one 2 MiB
/// page.
bool promotable(const PageTable& pt, Vpn base);

/// COLT: a fill coalesces the contiguous run holding the VPN within its
/// aligned 8-page block into one L2 entry. The L2 indexes by block.
class ColtMmu final : public Mmu {
 public:
  explicit ColtMmu(const PageTable& pt);

  std::string name() const override { return "colt"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn) override { flush(); }
  std::uint64_t coverage() const override { return l2_.coverage(); }

 private:
  TlbArray l2_;
};

/// Cluster TLB: a 768-entry 6-way regular array beside a 320-entry 5-way
/// clustered array. A clustered entry maps the pages of an aligned 8-page
/// block that share the walked page's virtual-to-physical displacement and
/// permission; fills go there when at least two pages qualify.
class ClusterMmu final : public Mmu {
 public:
  explicit ClusterMmu(const PageTable& pt);

  std::string name() const override { return "cluster"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn) override { flush(); }
  std::uint64_t coverage() const override { return regular_.coverage() + clustered_.coverage(); }

  const TlbArray& regular_array() const { return regular_; }
  const TlbArray& clustered_array() const { return clustered_; }

 private:
  TlbArray regular_;
  TlbArray clustered_;
};

struct Range {
  Vpn start = 0;
  std::uint64_t length = 0;
  Ppn ppn = 0;

  bool covers(Vpn vpn) const { return vpn >= start && vpn - start < length; }
};

/// Fully associative range TLB with LRU replacement.
class RangeTlb {
 public:
  explicit RangeTlb(std::size_t entries = 32) : capacity_(entries) {}

  const Range* probe(Vpn vpn);
  void insert(const Range& r);
  void flush() { slots_.clear(); }
  std::uint64_t coverage() const;
  std::size_t size() const { return slots_.size(); }

 private:
  struct Slot {
    Range range;
    std::uint64_t stamp;
  };
  std::size_t capacity_;
  std::uint64_t clock_ = 0;
  std::vector<Slot> slots_;
};

/// RMM: the baseline L2 plus a 32-entry range TLB over contiguity chunks of
/// at least `min_range_pages` pages.
class RmmMmu final : public Mmu {
 public:
  RmmMmu(const PageTable& pt, std::uint64_t min_range_pages = 32);

  std::string name() const override { return "rmm"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn vpn) override;
  std::uint64_t coverage() const override { return l2_.coverage() + ranges_tlb_.coverage(); }

  std::span<const Range> range_table() const { return ranges_; }

 private:
  void rebuild_ranges();
  const Range* find_range(Vpn vpn) const;

  std::uint64_t min_range_pages_;
  TlbArray l2_;
  RangeTlb ranges_tlb_;
  std::vector<Range> ranges_;  // sorted by start
};

/// Candidate anchor distances: powers of two from 2 to 2048.
std::vector<std::uint64_t> anchor_distances();

/// Expected L2 entries needed to cover every chunk of the histogram with
/// anchors `distance` apart, averaging over chunk placements relative to the
/// anchor grid.
double anchor_entry_estimate(const ContiguityHistogram& h, std::uint64_t distance);

/// Distance minimizing anchor_entry_estimate; ties go to the smaller one.
std::uint64_t select_anchor_distance(const ContiguityHistogram& h);

/// Anchor TLB: anchors every `distance` pages record the contiguous run
/// toward the next anchor. L2 indexes above the anchor distance; the lookup
/// is one regular probe then one anchor probe. In dynamic mode the distance
/// is chosen from the contiguity histogram and re-selected by reevaluate().
class AnchorMmu final : public Mmu {
 public:
  AnchorMmu(const PageTable& pt, std::uint64_t distance);
  /// Dynamic mode.
  explicit AnchorMmu(const PageTable& pt);

  std::string name() const override { return dynamic_ ? "anchor-dynamic" : "anchor"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn vpn) override;
  bool reevaluate() override;
  std::uint64_t coverage() const override { return l2_.coverage(); }
  std::uint64_t init_work() const override { return init_work_; }

  std::uint64_t distance() const { return std::uint64_t{1} << shift_; }
  const AnnotationStore& anchors() const { return anchors_; }

 private:
  void rebuild(std::uint64_t distance);

  bool dynamic_;
  unsigned shift_ = 0;
  AnnotationStore anchors_;
  TlbArray l2_;
  std::uint64_t init_work_ = 0;
};

}  // namespace ktlb
