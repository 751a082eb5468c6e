#pragma once

#include <cstdint>

#include "ktlb/memory_map.hpp"

namespace fixtures {

/// Three chunks: vpn 0-1 -> 20-21, 4-6 -> 30-32, 8-13 -> 10-15.
inline ktlb::PageTable figure_table() {
  ktlb::PageTable pt;
  for (ktlb::Vpn v = 0; v < 2; ++v) pt.map(v, 20 + v);
  for (ktlb::Vpn v = 4; v < 7; ++v) pt.map(v, 30 + v - 4);
  for (ktlb::Vpn v = 8; v < 14; ++v) pt.map(v, 10 + v - 8);
  return pt;
}

/// One contiguous run of `n` pages at `vpn`, frames from `ppn`.
inline ktlb::PageTable run_table(ktlb::Vpn vpn, std::uint64_t n, ktlb::Ppn ppn) {
  ktlb::PageTable pt;
  for (std::uint64_t i = 0; i < n; ++i) pt.map(vpn + i, ppn + i);
  return pt;
}

/// `count` chunks of `size` pages each, every chunk starting on a multiple
/// of `align`, frames congruent to the vpn so alignment holds physically.
inline ktlb::PageTable uniform_table(std::uint64_t count, std::uint64_t size, std::uint64_t align) {
  ktlb::PageTable pt;
  const std::uint64_t stride = ((size + 1 + align - 1) / align) * align;
  for (std::uint64_t c = 0; c < count; ++c) {
    const ktlb::Vpn base = c * stride;
    for (std::uint64_t i = 0; i < size; ++i) pt.map(base + i, (1u << 20) + base + i);
  }
  return pt;
}

}  // namespace fixtures
