#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ktlb/memory_map.hpp"

namespace ktlb {

inline constexpr unsigned kMaxAlignmentWidth = 11;
inline constexpr unsigned kMaxAlignmentCount = 8;

/// The set K of alignment widths, kept in descending order, plus the
/// selection knobs theta (coverage target) and psi (maximum |K|).
class AlignmentSet {
 public:
  AlignmentSet() = default;
  /// Throws ConfigError on duplicate widths, a width outside [1, 11],
  /// |widths| > psi, psi > 8, or theta outside (0, 1].
  explicit AlignmentSet(std::vector<unsigned> widths, double theta = 0.9,
                        unsigned psi = 4);

  /// Widths in descending order.
  std::span<const unsigned> widths() const { return widths_; }
  std::size_t size() const { return widths_.size(); }
  bool empty() const { return widths_.empty(); }
  bool contains(unsigned k) const;
  /// Largest width; 0 when empty.
  unsigned max_width() const { return widths_.empty() ? 0 : widths_.front(); }
  unsigned min_width() const { return widths_.empty() ? 0 : widths_.back(); }
  double theta() const { return theta_; }
  unsigned psi() const { return psi_; }

  friend bool operator==(const AlignmentSet& a, const AlignmentSet& b) {
    return a.widths_ == b.widths_;
  }

 private:
  std::vector<unsigned> widths_;
  double theta_ = 0.9;
  unsigned psi_ = 4;
};

/// Clears the `k` least significant bits of `vpn`.
constexpr Vpn aligned_vpn(Vpn vpn, unsigned k) {
  return k >= 64 ? 0 : vpn & ~((Vpn{1} << k) - 1);
}

/// Rightward compatible classification: the largest k in K whose low k bits
/// of `vpn` are all zero.
std::optional<unsigned> alignment_class(Vpn vpn, const AlignmentSet& K);

/// Length of the contiguous, permission-uniform run starting exactly at
/// `vpn_k`, capped at 2^k; 0 when `vpn_k` is unmapped.
std::uint64_t compute_contiguity(const PageTable& pt, Vpn vpn_k, unsigned k);

struct AlignedAnnotation {
  Vpn vpn = 0;
  unsigned width = 0;
  std::uint64_t contiguity = 0;

  bool covers(Vpn v) const { return v >= vpn && v - vpn < contiguity; }
  friend bool operator==(const AlignedAnnotation&, const AlignedAnnotation&) = default;
};

/// Aligned page-table annotations, sorted by VPN. One annotation per mapped
/// VPN that is a multiple of 2^min(K); an aligned VPN whose own page is
/// unmapped would hold contiguity 0 and is not stored.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  AnnotationStore(AlignmentSet K, std::vector<AlignedAnnotation> sorted);

  const AlignmentSet& alignment() const { return K_; }
  std::span<const AlignedAnnotation> annotations() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const AlignedAnnotation* find(Vpn vpn) const;
  /// The annotation at aligned_vpn(vpn, k) when that VPN is classified as
  /// width k; nullptr otherwise.
  const AlignedAnnotation* find_class(Vpn vpn, unsigned k) const;

  void set_contiguity(Vpn vpn, std::uint64_t contiguity);
  void insert(const AlignedAnnotation& a);

  friend bool operator==(const AnnotationStore&, const AnnotationStore&) = default;

 private:
  AlignedAnnotation* find_mut(Vpn vpn);

  AlignmentSet K_;
  std::vector<AlignedAnnotation> entries_;
};

struct AnnotationResult {
  AnnotationStore store;
  /// Annotations written, the initialization cost unit.
  std::uint64_t work = 0;
};

/// Builds every annotation in one pass over the mapping, parallel over
/// contiguity chunks when OpenMP is available.
AnnotationResult annotate_table(const PageTable& pt, const AlignmentSet& K);
/// Single-threaded reference for annotate_table; same result.
AnnotationResult annotate_table_serial(const PageTable& pt, const AlignmentSet& K);
/// Same kernel over an already-scanned chunk list.
AnnotationResult annotate_chunks(std::span<const ContiguityChunk> chunks,
                                 const AlignmentSet& K, bool parallel);

struct UpdateResult {
  /// Annotations whose value was recomputed.
  std::uint64_t recomputed = 0;
  /// The caller must flush every TLB.
  bool shootdown = false;
};

/// Recomputes every annotation whose 2^width window holds `vpn` against the
/// current page table. Returns the number recomputed.
std::uint64_t refresh_annotations(const PageTable& pt, AnnotationStore& annotations, Vpn vpn);

/// Unmaps `vpn` and recomputes every annotation whose 2^width window holds
/// it. Throws Error when `vpn` is not mapped.
UpdateResult update_on_unmap(PageTable& pt, AnnotationStore& annotations, Vpn vpn);

/// Maps a new page and refreshes the annotations whose window holds it,
/// creating the annotation at `m.vpn` when it is an aligned position.
UpdateResult update_on_map(PageTable& pt, AnnotationStore& annotations,
                           const PageMapping& m);

}  // namespace ktlb
