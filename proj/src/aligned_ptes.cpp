#include "ktlb/aligned_ptes.hpp"

#include <algorithm>
#include <functional>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ktlb {

AlignmentSet::AlignmentSet(std::vector<unsigned> widths, double theta, unsigned psi)
    : widths_(std::move(widths)), theta_(theta), psi_(psi) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (psi > kMaxAlignmentCount) throw ConfigError("psi must be at most 8");
  std::sort(widths_.begin(), widths_.end(), std::greater<>());
  if (std::adjacent_find(widths_.begin(), widths_.end()) != widths_.end()) {
    throw ConfigError("alignment widths must be distinct");
  }
  for (unsigned k : widths_) {
    if (k < 1 || k > kMaxAlignmentWidth) throw ConfigError("alignment width must lie in [1, 11]");
  }
  if (widths_.size() > psi_) throw ConfigError("|K| exceeds psi");
}

bool AlignmentSet::contains(unsigned k) const {
  return std::find(widths_.begin(), widths_.end(), k) != widths_.end();
}

std::optional<unsigned> alignment_class(Vpn vpn, const AlignmentSet& K) {
  for (unsigned k : K.widths()) {
    if (aligned_vpn(vpn, k) == vpn) return k;
  }
  return std::nullopt;
}

std::uint64_t compute_contiguity(const PageTable& pt, Vpn vpn_k, unsigned k) {
  const std::uint64_t cap = std::uint64_t{1} << k;
  auto it = pt.lower_bound(vpn_k);
  if (it == pt.end() || it->first != vpn_k) return 0;
  std::uint64_t run = 1;
  auto prev = it++;
  while (run < cap && it != pt.end() && continues_run(prev->second, it->second)) {
    ++run;
    prev = it++;
  }
  return run;
}

AnnotationStore::AnnotationStore(AlignmentSet K, std::vector<AlignedAnnotation> sorted)
    : K_(std::move(K)), entries_(std::move(sorted)) {}

const AlignedAnnotation* AnnotationStore::find(Vpn vpn) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), vpn,
                             [](const AlignedAnnotation& a, Vpn v) { return a.vpn < v; });
  return it != entries_.end() && it->vpn == vpn ? &*it : nullptr;
}

const AlignedAnnotation* AnnotationStore::find_class(Vpn vpn, unsigned k) const {
  const AlignedAnnotation* a = find(aligned_vpn(vpn, k));
  return a != nullptr && a->width == k ? a : nullptr;
}

AlignedAnnotation* AnnotationStore::find_mut(Vpn vpn) {
  return const_cast<AlignedAnnotation*>(std::as_const(*this).find(vpn));
}

void AnnotationStore::set_contiguity(Vpn vpn, std::uint64_t contiguity) {
  if (AlignedAnnotation* a = find_mut(vpn)) a->contiguity = contiguity;
}

void AnnotationStore::insert(const AlignedAnnotation& a) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), a.vpn,
                             [](const AlignedAnnotation& e, Vpn v) { return e.vpn < v; });
  if (it != entries_.end() && it->vpn == a.vpn) {
    *it = a;
  } else {
    entries_.insert(it, a);
  }
}

namespace {

// Number of multiples of 2^m in [start, end).
std::uint64_t aligned_positions(Vpn start, Vpn end, unsigned m) {
  const Vpn first = (start + (Vpn{1} << m) - 1) >> m;
  const Vpn last = (end + (Vpn{1} << m) - 1) >> m;  // exclusive
  return last > first ? last - first : 0;
}

void fill_chunk(const ContiguityChunk& c, const AlignmentSet& K, AlignedAnnotation* out) {
  const unsigned m = K.min_width();
  const Vpn step = Vpn{1} << m;
  for (Vpn v = aligned_vpn(c.start_vpn + step - 1, m); v < c.end_vpn(); v += step) {
    const unsigned width = *alignment_class(v, K);
    *out++ = {v, width, std::min<std::uint64_t>(c.end_vpn() - v, std::uint64_t{1} << width)};
  }
}

}  // namespace

AnnotationResult annotate_chunks(std::span<const ContiguityChunk> chunks,
                                 const AlignmentSet& K, bool parallel) {
  if (K.empty() || chunks.empty()) return {AnnotationStore(K, {}), 0};
  const unsigned m = K.min_width();
  const std::int64_t n = static_cast<std::int64_t>(chunks.size());

  std::vector<std::uint64_t> offsets(chunks.size() + 1, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    offsets[i + 1] = offsets[i] + aligned_positions(chunks[i].start_vpn, chunks[i].end_vpn(), m);
  }
  std::vector<AlignedAnnotation> out(offsets.back());

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) fill_chunk(chunks[i], K, out.data() + offsets[i]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) fill_chunk(chunks[i], K, out.data() + offsets[i]);
  }
  const std::uint64_t work = out.size();
  return {AnnotationStore(K, std::move(out)), work};
}

AnnotationResult annotate_table(const PageTable& pt, const AlignmentSet& K) {
  const auto chunks = scan_contiguity_chunks(pt);
  return annotate_chunks(chunks, K, true);
}

AnnotationResult annotate_table_serial(const PageTable& pt, const AlignmentSet& K) {
  const auto chunks = scan_contiguity_chunks(pt);
  return annotate_chunks(chunks, K, false);
}

std::uint64_t refresh_annotations(const PageTable& pt, AnnotationStore& annotations, Vpn vpn) {
  std::uint64_t recomputed = 0;
  const AlignmentSet& K = annotations.alignment();
  for (unsigned k : K.widths()) {
    if (const AlignedAnnotation* a = annotations.find_class(vpn, k)) {
      annotations.set_contiguity(a->vpn, compute_contiguity(pt, a->vpn, k));
      ++recomputed;
    }
  }
  return recomputed;
}

UpdateResult update_on_unmap(PageTable& pt, AnnotationStore& annotations, Vpn vpn) {
  pt.unmap(vpn);
  return {refresh_annotations(pt, annotations, vpn), true};
}

UpdateResult update_on_map(PageTable& pt, AnnotationStore& annotations, const PageMapping& m) {
  pt.map(m.vpn, m.ppn, m.perm);
  const AlignmentSet& K = annotations.alignment();
  if (!K.empty() && aligned_vpn(m.vpn, K.min_width()) == m.vpn &&
      annotations.find(m.vpn) == nullptr) {
    const unsigned width = *alignment_class(m.vpn, K);
    annotations.insert({m.vpn, width, 0});
  }
  return {refresh_annotations(pt, annotations, m.vpn), true};
}

}  // namespace ktlb
