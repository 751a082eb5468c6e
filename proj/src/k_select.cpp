#include "ktlb/k_select.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

namespace ktlb {

namespace {

constexpr std::array<SizeRange, 7> kSizeRanges = {{
    {2, 16, 4},
    {17, 64, 6},
    {65, 128, 7},
    {129, 256, 8},
    {257, 512, 9},
    {513, 1024, 10},
    {1025, std::numeric_limits<std::uint64_t>::max(), 11},
}};

}  // namespace

std::span<const SizeRange> size_range_table() { return kSizeRanges; }

std::optional<unsigned> size_to_alignment(std::uint64_t size) {
  for (const auto& r : kSizeRanges) {
    if (size >= r.lo && size <= r.hi) return r.width;
  }
  return std::nullopt;
}

AlignmentWeight alignment_weights(const ContiguityHistogram& h) {
  AlignmentWeight weight;
  for (const auto& bin : h.bins) {
    if (auto k = size_to_alignment(bin.size)) weight[*k] += bin.size * bin.freq;
  }
  return weight;
}

AlignmentSet determine_K(const ContiguityHistogram& h, double theta, unsigned psi) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (psi < 1 || psi > kMaxAlignmentCount) throw ConfigError("psi must lie in [1, 8]");

  const AlignmentWeight weight = alignment_weights(h);
  std::uint64_t total = 0;
  for (const auto& [k, coverage] : weight) total += coverage;

  std::vector<std::pair<unsigned, std::uint64_t>> order(weight.begin(), weight.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first > b.first;
  });

  std::vector<unsigned> K;
  std::uint64_t sum = 0;
  const double target = static_cast<double>(total) * theta;
  for (const auto& [k, coverage] : order) {
    if (K.size() == psi) break;
    K.push_back(k);
    sum += coverage;
    if (static_cast<double>(sum) > target) break;
  }
  return AlignmentSet(std::move(K), theta, psi);
}

Reevaluation reevaluate_K(const AlignmentSet& current, const ContiguityHistogram& h,
                          bool interval_elapsed) {
  if (!interval_elapsed) return {current, false};
  AlignmentSet next = determine_K(h, current.theta(), current.psi());
  const bool changed = !(next == current);
  return {changed ? std::move(next) : current, changed};
}

}  // namespace ktlb
