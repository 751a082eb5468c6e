#include "ktlb/baselines.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace ktlb {

// ---- Base / THP -----------------------------------------------------------

bool promotable(const PageTable& pt, Vpn base) {
  if (aligned_vpn(base, kHugeShift) != base) return false;
  auto it = pt.lower_bound(base);
  if (it == pt.end() || it->first != base) return false;
  if (aligned_vpn(it->second.ppn, kHugeShift) != it->second.ppn) return false;
  const PageMapping* prev = &it->second;
  for (std::uint64_t i = 1; i < kHugePages; ++i) {
    ++it;
    if (it == pt.end() || !continues_run(*prev, it->second)) return false;
    prev = &it->second;
  }
  return true;
}

BaseMmu::BaseMmu(const PageTable& pt, bool huge_pages)
    : Mmu(pt), huge_pages_(huge_pages), l2_(TlbArray::with_entries(kL2Entries, kL2Ways)) {
  if (!huge_pages_) return;
  for (const ContiguityChunk& c : scan_contiguity_chunks(pt)) {
    if (c.size < kHugePages) continue;
    Vpn b = aligned_vpn(c.start_vpn + kHugePages - 1, kHugeShift);
    for (; b + kHugePages <= c.end_vpn(); b += kHugePages) {
      const PageMapping* m = pt.find(b);
      if (aligned_vpn(m->ppn, kHugeShift) == m->ppn) promoted_.insert(b);
    }
  }
}

Translation BaseMmu::translate(Vpn vpn) {
  const Vpn region = aligned_vpn(vpn, kHugeShift);
  const bool huge = huge_pages_ && promoted_.count(region) != 0;
  if (huge) {
    if (const TlbEntry* e = l1_.huge.probe(region, EntryKind::kHuge)) {
      return {e->translate(vpn), Outcome::kL1Hit};
    }
    if (const TlbEntry* e = l2_.probe(region, EntryKind::kHuge)) {
      const TlbEntry entry = *e;
      l1_.huge.insert(entry);
      return {entry.translate(vpn), Outcome::kL2Hit};
    }
    const PageMapping& m = walk(vpn);
    const TlbEntry entry = TlbEntry::huge(region, m.ppn - (vpn - region));
    l1_.huge.insert(entry);
    l2_.insert(entry);
    return {m.ppn, Outcome::kWalk, 0, FillKind::kHuge};
  }

  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  if (const TlbEntry* e = l2_.probe(vpn, EntryKind::kRegular)) {
    const Ppn ppn = e->ppn;
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }
  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));
  l2_.insert(TlbEntry::regular(vpn, m.ppn));
  return {m.ppn, Outcome::kWalk, 0, FillKind::kRegular};
}

void BaseMmu::flush() {
  l1_.flush();
  l2_.flush();
}

void BaseMmu::page_unmapped(Vpn vpn) {
  // The 2 MiB page is split back into base pages.
  promoted_.erase(aligned_vpn(vpn, kHugeShift));
  flush();
}

// ---- COLT -----------------------------------------------------------------

namespace {

constexpr unsigned kBlockShift = 3;
constexpr std::uint64_t kBlockPages = 8;

// Pages of the 8-page block holding `m` accepted by `same`, as a sub-map.
template <typename Pred>
std::uint8_t block_submap(const PageTable& pt, const PageMapping& m, Pred same) {
  const Vpn block = aligned_vpn(m.vpn, kBlockShift);
  std::uint8_t submap = 0;
  for (auto it = pt.lower_bound(block); it != pt.end() && it->first < block + kBlockPages; ++it) {
    if (same(it->second)) submap |= static_cast<std::uint8_t>(1u << (it->first - block));
  }
  return submap;
}

}  // namespace

ColtMmu::ColtMmu(const PageTable& pt)
    : Mmu(pt), l2_(TlbArray::with_entries(kL2Entries, kL2Ways, kBlockShift)) {}

Translation ColtMmu::translate(Vpn vpn) {
  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  const Vpn block = aligned_vpn(vpn, kBlockShift);
  if (const TlbEntry* e = l2_.probe_covering(block, EntryKind::kCoalesced, vpn)) {
    const Ppn ppn = e->translate(vpn);
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }
  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));

  // Contiguous run through vpn, clipped to the block.
  const unsigned pos = static_cast<unsigned>(vpn - block);
  std::uint8_t submap = static_cast<std::uint8_t>(1u << pos);
  const PageMapping* prev = &m;
  for (unsigned i = pos + 1; i < kBlockPages; ++i) {
    const PageMapping* next = pt_->find(block + i);
    if (next == nullptr || !continues_run(*prev, *next)) break;
    submap |= static_cast<std::uint8_t>(1u << i);
    prev = next;
  }
  const PageMapping* after = &m;
  for (unsigned i = pos; i-- > 0;) {
    const PageMapping* before = pt_->find(block + i);
    if (before == nullptr || !continues_run(*before, *after)) break;
    submap |= static_cast<std::uint8_t>(1u << i);
    after = before;
  }
  l2_.insert(TlbEntry::coalesced(block, m.ppn - pos, submap));
  return {m.ppn, Outcome::kWalk, 0, FillKind::kCoalesced};
}

void ColtMmu::flush() {
  l1_.flush();
  l2_.flush();
}

// ---- Cluster --------------------------------------------------------------

ClusterMmu::ClusterMmu(const PageTable& pt)
    : Mmu(pt), regular_(TlbArray::with_entries(768, 6)),
      clustered_(TlbArray::with_entries(320, 5, kBlockShift)) {}

Translation ClusterMmu::translate(Vpn vpn) {
  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  // Both arrays are searched in parallel.
  const Vpn block = aligned_vpn(vpn, kBlockShift);
  if (const TlbEntry* e = regular_.probe(vpn, EntryKind::kRegular)) {
    const Ppn ppn = e->ppn;
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }
  if (const TlbEntry* e = clustered_.probe_covering(block, EntryKind::kCoalesced, vpn)) {
    const Ppn ppn = e->translate(vpn);
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kCoalescedHit, 1};
  }
  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));
  const Ppn block_ppn = m.ppn - (vpn - block);
  const std::uint8_t submap = block_submap(*pt_, m, [&](const PageMapping& p) {
    return p.ppn - (p.vpn - block) == block_ppn && p.perm == m.perm;
  });
  if (std::popcount(submap) >= 2) {
    clustered_.insert(TlbEntry::coalesced(block, block_ppn, submap));
    return {m.ppn, Outcome::kWalk, 0, FillKind::kCoalesced};
  }
  regular_.insert(TlbEntry::regular(vpn, m.ppn));
  return {m.ppn, Outcome::kWalk, 0, FillKind::kRegular};
}

void ClusterMmu::flush() {
  l1_.flush();
  regular_.flush();
  clustered_.flush();
}

// ---- RMM ------------------------------------------------------------------

const Range* RangeTlb::probe(Vpn vpn) {
  for (Slot& s : slots_) {
    if (s.range.covers(vpn)) {
      s.stamp = ++clock_;
      return &s.range;
    }
  }
  return nullptr;
}

void RangeTlb::insert(const Range& r) {
  for (Slot& s : slots_) {
    if (s.range.start == r.start) {
      s = {r, ++clock_};
      return;
    }
  }
  if (slots_.size() < capacity_) {
    slots_.push_back({r, ++clock_});
    return;
  }
  auto victim = std::min_element(slots_.begin(), slots_.end(),
                                 [](const Slot& a, const Slot& b) { return a.stamp < b.stamp; });
  *victim = {r, ++clock_};
}

std::uint64_t RangeTlb::coverage() const {
  std::uint64_t total = 0;
  for (const Slot& s : slots_) total += s.range.length;
  return total;
}

RmmMmu::RmmMmu(const PageTable& pt, std::uint64_t min_range_pages)
    : Mmu(pt), min_range_pages_(min_range_pages),
      l2_(TlbArray::with_entries(kL2Entries, kL2Ways)) {
  if (min_range_pages_ == 0) throw ConfigError("range threshold must be positive");
  rebuild_ranges();
}

void RmmMmu::rebuild_ranges() {
  ranges_.clear();
  for (const ContiguityChunk& c : scan_contiguity_chunks(*pt_)) {
    if (c.size >= min_range_pages_) ranges_.push_back({c.start_vpn, c.size, pt_->find(c.start_vpn)->ppn});
  }
}

const Range* RmmMmu::find_range(Vpn vpn) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), vpn,
                             [](Vpn v, const Range& r) { return v < r.start; });
  if (it == ranges_.begin()) return nullptr;
  --it;
  return it->covers(vpn) ? &*it : nullptr;
}

Translation RmmMmu::translate(Vpn vpn) {
  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  if (const TlbEntry* e = l2_.probe(vpn, EntryKind::kRegular)) {
    const Ppn ppn = e->ppn;
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }
  if (const Range* r = ranges_tlb_.probe(vpn)) {
    const Ppn ppn = r->ppn + (vpn - r->start);
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kCoalescedHit, 1};
  }
  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));
  l2_.insert(TlbEntry::regular(vpn, m.ppn));
  Translation t{m.ppn, Outcome::kWalk, 0, FillKind::kRegular};
  if (const Range* r = find_range(vpn)) {
    ranges_tlb_.insert(*r);
    t.fill = FillKind::kRange;
  }
  return t;
}

void RmmMmu::flush() {
  l1_.flush();
  l2_.flush();
  ranges_tlb_.flush();
}

void RmmMmu::page_unmapped(Vpn) {
  rebuild_ranges();
  flush();
}

// ---- Anchor ---------------------------------------------------------------

std::vector<std::uint64_t> anchor_distances() {
  std::vector<std::uint64_t> d;
  for (unsigned k = 1; k <= kMaxAlignmentWidth; ++k) d.push_back(std::uint64_t{1} << k);
  return d;
}

double anchor_entry_estimate(const ContiguityHistogram& h, std::uint64_t distance) {
  // A chunk whose first anchor lies r pages in needs r regular entries plus
  // one anchor entry per `distance` pages after it; r is uniform in [0, d).
  double total = 0;
  for (const HistogramBin& bin : h.bins) {
    const std::uint64_t s = bin.size;
    std::uint64_t sum = 0;
    for (std::uint64_t r = 0; r < distance; ++r) {
      if (r >= s) {
        sum += s;
      } else {
        sum += r + (s - r + distance - 1) / distance;
      }
    }
    total += static_cast<double>(bin.freq) * static_cast<double>(sum) /
             static_cast<double>(distance);
  }
  return total;
}

std::uint64_t select_anchor_distance(const ContiguityHistogram& h) {
  std::uint64_t best = 2;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::uint64_t d : anchor_distances()) {
    const double cost = anchor_entry_estimate(h, d);
    if (cost < best_cost) {
      best_cost = cost;
      best = d;
    }
  }
  return best;
}

namespace {

std::uint64_t checked_distance(std::uint64_t distance) {
  if (!std::has_single_bit(distance) || distance < 2 ||
      distance > (std::uint64_t{1} << kMaxAlignmentWidth)) {
    throw ConfigError("anchor distance must be a power of two in [2, 2048]");
  }
  return distance;
}

}  // namespace

AnchorMmu::AnchorMmu(const PageTable& pt, std::uint64_t distance)
    : Mmu(pt), dynamic_(false), l2_(TlbArray::with_entries(kL2Entries, kL2Ways)) {
  rebuild(checked_distance(distance));
}

AnchorMmu::AnchorMmu(const PageTable& pt)
    : Mmu(pt), dynamic_(true), l2_(TlbArray::with_entries(kL2Entries, kL2Ways)) {
  rebuild(select_anchor_distance(build_histogram(scan_contiguity_chunks(pt))));
}

void AnchorMmu::rebuild(std::uint64_t distance) {
  shift_ = static_cast<unsigned>(std::countr_zero(distance));
  AnnotationResult result = annotate_table(*pt_, AlignmentSet({shift_}, 0.9, 1));
  anchors_ = std::move(result.store);
  init_work_ += result.work;
  l2_.set_index_shift(shift_);
  flush();
}

Translation AnchorMmu::translate(Vpn vpn) {
  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  if (const TlbEntry* e = l2_.probe(vpn, EntryKind::kRegular)) {
    const Ppn ppn = e->ppn;
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }
  const Vpn anchor = aligned_vpn(vpn, shift_);
  const TlbEntry* e = l2_.probe(anchor, EntryKind::kAligned, shift_);
  if (e != nullptr && e->covers(vpn)) {
    const Ppn ppn = e->translate(vpn);
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kCoalescedHit, 1};
  }
  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));
  Translation t{m.ppn, Outcome::kWalk, 1};
  const AlignedAnnotation* a = anchors_.find(anchor);
  if (a != nullptr && a->covers(vpn)) {
    l2_.insert(TlbEntry::aligned(anchor, m.ppn - (vpn - anchor), shift_, a->contiguity));
    t.fill = FillKind::kAligned;
    t.fill_width = shift_;
  } else {
    l2_.insert(TlbEntry::regular(vpn, m.ppn));
    t.fill = FillKind::kRegular;
  }
  return t;
}

void AnchorMmu::flush() {
  l1_.flush();
  l2_.flush();
}

void AnchorMmu::page_unmapped(Vpn vpn) {
  refresh_annotations(*pt_, anchors_, vpn);
  flush();
}

bool AnchorMmu::reevaluate() {
  if (!dynamic_) return false;
  const std::uint64_t d = select_anchor_distance(build_histogram(scan_contiguity_chunks(*pt_)));
  if (d == distance()) return false;
  rebuild(d);
  return true;
}

}  // namespace ktlb
