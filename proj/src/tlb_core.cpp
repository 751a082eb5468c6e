#include "ktlb/tlb_core.hpp"

namespace ktlb {

TlbArray::TlbArray(std::uint64_t sets, unsigned ways, unsigned index_shift)
    : sets_(sets), ways_(ways), index_shift_(index_shift), slots_(sets * ways) {
  if (sets == 0 || !std::has_single_bit(sets)) throw ConfigError("TLB set count must be a power of two");
  if (ways == 0) throw ConfigError("TLB needs at least one way");
}

void TlbArray::set_index_shift(unsigned shift) {
  if (shift != index_shift_) {
    index_shift_ = shift;
    flush();
  }
}

TlbEntry* TlbArray::find(Vpn tag_vpn, EntryKind kind, unsigned width) {
  TlbEntry* set = slots_.data() + set_of(tag_vpn, kind) * ways_;
  for (unsigned w = 0; w < ways_; ++w) {
    TlbEntry& e = set[w];
    if (e.valid && e.tag_vpn == tag_vpn && e.kind == kind && e.width == width) return &e;
  }
  return nullptr;
}

const TlbEntry* TlbArray::probe(Vpn tag_vpn, EntryKind kind, unsigned width) {
  ++stats_.probes;
  TlbEntry* e = find(tag_vpn, kind, width);
  if (e == nullptr) {
    ++stats_.misses;
    return nullptr;
  }
  ++stats_.hits;
  e->lru_stamp = ++clock_;
  return e;
}

const TlbEntry* TlbArray::probe_covering(Vpn tag_vpn, EntryKind kind, Vpn vpn) {
  ++stats_.probes;
  TlbEntry* set = slots_.data() + set_of(tag_vpn, kind) * ways_;
  for (unsigned w = 0; w < ways_; ++w) {
    TlbEntry& e = set[w];
    if (e.valid && e.tag_vpn == tag_vpn && e.kind == kind && e.covers(vpn)) {
      ++stats_.hits;
      e.lru_stamp = ++clock_;
      return &e;
    }
  }
  ++stats_.misses;
  return nullptr;
}

std::optional<TlbEntry> TlbArray::insert(TlbEntry entry) {
  ++stats_.inserts;
  entry.valid = true;
  entry.lru_stamp = ++clock_;
  if (TlbEntry* same = find(entry.tag_vpn, entry.kind, entry.width)) {
    *same = entry;
    return std::nullopt;
  }
  TlbEntry* set = slots_.data() + set_of(entry.tag_vpn, entry.kind) * ways_;
  TlbEntry* victim = set;
  for (unsigned w = 0; w < ways_; ++w) {
    if (!set[w].valid) {
      set[w] = entry;
      return std::nullopt;
    }
    if (set[w].lru_stamp < victim->lru_stamp) victim = &set[w];
  }
  ++stats_.evictions;
  TlbEntry evicted = *victim;
  *victim = entry;
  return evicted;
}

void TlbArray::flush() {
  for (auto& e : slots_) e.valid = false;
}

std::uint64_t TlbArray::coverage() const {
  std::uint64_t total = 0;
  for (const auto& e : slots_) {
    if (e.valid) total += e.coverage();
  }
  return total;
}

std::uint64_t TlbArray::valid_entries() const {
  std::uint64_t n = 0;
  for (const auto& e : slots_) n += e.valid ? 1 : 0;
  return n;
}

}  // namespace ktlb
