#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/k_select.hpp"
#include "ktlb/mmu.hpp"

namespace ktlb {

/// Remembers the alignment width of the latest aligned hit (4 bits are
/// enough for |K| <= 8).
class Predictor {
 public:
  std::optional<unsigned> last_width() const { return last_; }
  void record_hit(unsigned width) { last_ = width; }
  void reset() { last_.reset(); }

 private:
  std::optional<unsigned> last_;
};

/// Probe order for the aligned lookup: the predicted width first, then the
/// remaining widths of K in descending order.
std::vector<unsigned> predict(const Predictor& predictor, const AlignmentSet& K);

struct KAlignedOptions {
  /// Fixed K. When empty, K is chosen from the mapping's contiguity
  /// histogram with theta and psi.
  std::optional<AlignmentSet> widths;
  double theta = 0.9;
  unsigned psi = 4;
};

/// L2 TLB with K-bit aligned entries: L1, L2 regular lookup, predicted
/// aligned lookup, then walk and aligned fill.
class KAlignedMmu final : public Mmu {
 public:
  KAlignedMmu(const PageTable& pt, KAlignedOptions options = {});

  std::string name() const override { return "kaligned"; }
  Translation translate(Vpn vpn) override;
  void flush() override;
  void page_unmapped(Vpn vpn) override;
  bool reevaluate() override;
  std::uint64_t coverage() const override { return l2_.coverage(); }
  std::uint64_t init_work() const override { return init_work_; }

  /// Picks the L2 entry to insert after a walk of `vpn`: the first aligned
  /// annotation, in descending width order, whose contiguity covers it.
  /// nullptr means a regular fill.
  const AlignedAnnotation* fill_candidate(Vpn vpn) const;

  const AlignmentSet& alignment() const { return annotations_.alignment(); }
  const AnnotationStore& annotations() const { return annotations_; }
  const Predictor& predictor() const { return predictor_; }
  const TlbArray& l2() const { return l2_; }

 private:
  void rebuild(const AlignmentSet& K);

  KAlignedOptions options_;
  AnnotationStore annotations_;
  Predictor predictor_;
  TlbArray l2_;
  std::uint64_t init_work_ = 0;
};

}  // namespace ktlb
