#include "ktlb/kaligned_mmu.hpp"

#include <array>

namespace ktlb {

namespace {

struct ProbeOrder {
  std::array<unsigned, kMaxAlignmentCount> widths{};
  std::size_t size = 0;
};

ProbeOrder probe_order(const Predictor& predictor, const AlignmentSet& K) {
  ProbeOrder order;
  const auto predicted = predictor.last_width();
  if (predicted && K.contains(*predicted)) order.widths[order.size++] = *predicted;
  for (unsigned k : K.widths()) {
    if (predicted && k == *predicted) continue;
    order.widths[order.size++] = k;
  }
  return order;
}

}  // namespace

std::vector<unsigned> predict(const Predictor& predictor, const AlignmentSet& K) {
  const ProbeOrder order = probe_order(predictor, K);
  return {order.widths.begin(), order.widths.begin() + order.size};
}

KAlignedMmu::KAlignedMmu(const PageTable& pt, KAlignedOptions options)
    : Mmu(pt), options_(std::move(options)), l2_(TlbArray::with_entries(kL2Entries, kL2Ways)) {
  if (options_.widths) {
    rebuild(*options_.widths);
  } else {
    const auto h = build_histogram(scan_contiguity_chunks(pt));
    rebuild(determine_K(h, options_.theta, options_.psi));
  }
}

void KAlignedMmu::rebuild(const AlignmentSet& K) {
  AnnotationResult result = annotate_table(*pt_, K);
  annotations_ = std::move(result.store);
  init_work_ += result.work;
  l2_.set_index_shift(K.max_width());
  predictor_.reset();
  flush();
}

const AlignedAnnotation* KAlignedMmu::fill_candidate(Vpn vpn) const {
  for (unsigned k : alignment().widths()) {
    const AlignedAnnotation* a = annotations_.find_class(vpn, k);
    if (a != nullptr && a->covers(vpn)) return a;
  }
  return nullptr;
}

Translation KAlignedMmu::translate(Vpn vpn) {
  if (const TlbEntry* e = l1_.small.probe(vpn, EntryKind::kRegular)) {
    return {e->ppn, Outcome::kL1Hit};
  }
  if (const TlbEntry* e = l2_.probe(vpn, EntryKind::kRegular)) {
    const Ppn ppn = e->ppn;
    l1_.small.insert(TlbEntry::regular(vpn, ppn));
    return {ppn, Outcome::kL2Hit};
  }

  const ProbeOrder order = probe_order(predictor_, alignment());
  unsigned lookups = 0;
  for (std::size_t i = 0; i < order.size; ++i) {
    const unsigned k = order.widths[i];
    ++lookups;
    const TlbEntry* e = l2_.probe(aligned_vpn(vpn, k), EntryKind::kAligned, k);
    if (e != nullptr && e->covers(vpn)) {
      const Ppn ppn = e->translate(vpn);
      predictor_.record_hit(k);
      l1_.small.insert(TlbEntry::regular(vpn, ppn));
      return {ppn, Outcome::kCoalescedHit, lookups};
    }
  }

  const PageMapping& m = walk(vpn);
  l1_.small.insert(TlbEntry::regular(vpn, m.ppn));
  Translation t{m.ppn, Outcome::kWalk, lookups};
  // Off the critical path: pick the widest covering aligned entry.
  if (const AlignedAnnotation* a = fill_candidate(vpn)) {
    const Ppn base_ppn = m.ppn - (vpn - a->vpn);
    l2_.insert(TlbEntry::aligned(a->vpn, base_ppn, a->width, a->contiguity));
    t.fill = FillKind::kAligned;
    t.fill_width = a->width;
  } else {
    l2_.insert(TlbEntry::regular(vpn, m.ppn));
    t.fill = FillKind::kRegular;
  }
  return t;
}

void KAlignedMmu::flush() {
  l1_.flush();
  l2_.flush();
}

void KAlignedMmu::page_unmapped(Vpn vpn) {
  refresh_annotations(*pt_, annotations_, vpn);
  flush();
}

bool KAlignedMmu::reevaluate() {
  if (options_.widths) return false;
  const auto h = build_histogram(scan_contiguity_chunks(*pt_));
  Reevaluation r = reevaluate_K(alignment(), h, true);
  if (r.changed) rebuild(r.K);
  return r.changed;
}

}  // namespace ktlb
