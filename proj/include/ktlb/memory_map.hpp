#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ktlb/types.hpp"

namespace ktlb {

struct PageMapping {
  Vpn vpn = 0;
  Ppn ppn = 0;
  Perm perm;

  friend bool operator==(const PageMapping&, const PageMapping&) = default;
};

/// One process's virtual-to-physical mapping, ordered by VPN.
class PageTable {
 public:
  using Map = std::map<Vpn, PageMapping>;
  using const_iterator = Map::const_iterator;

  PageTable() = default;

  /// Adds a mapping. Throws if the VPN is already mapped.
  void map(Vpn vpn, Ppn ppn, Perm perm = {});
  /// Removes a mapping. Throws if the VPN is not mapped.
  void unmap(Vpn vpn);

  const PageMapping* find(Vpn vpn) const {
    auto it = entries_.find(vpn);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::optional<Ppn> lookup(Vpn vpn) const {
    const PageMapping* m = find(vpn);
    return m ? std::optional<Ppn>(m->ppn) : std::nullopt;
  }
  bool contains(Vpn vpn) const { return entries_.count(vpn) != 0; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }
  /// First mapping with vpn >= the argument.
  const_iterator lower_bound(Vpn vpn) const { return entries_.lower_bound(vpn); }

  static constexpr std::uint64_t page_size() { return kPageSize; }

  friend bool operator==(const PageTable&, const PageTable&) = default;

 private:
  Map entries_;
};

/// Maximal run of pages contiguous in virtual and physical space with a
/// uniform permission.
struct ContiguityChunk {
  Vpn start_vpn = 0;
  std::uint64_t size = 0;

  Vpn end_vpn() const { return start_vpn + size; }
  friend bool operator==(const ContiguityChunk&, const ContiguityChunk&) = default;
};

/// True when `next` continues the run that ends with `prev`.
inline bool continues_run(const PageMapping& prev, const PageMapping& next) {
  return next.vpn == prev.vpn + 1 && next.ppn == prev.ppn + 1 &&
         next.perm == prev.perm;
}

std::vector<ContiguityChunk> scan_contiguity_chunks(const PageTable& pt);

struct HistogramBin {
  std::uint64_t size = 0;
  std::uint64_t freq = 0;
  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// (size, freq) pairs with distinct sizes, ascending by size.
struct ContiguityHistogram {
  std::vector<HistogramBin> bins;

  bool empty() const { return bins.empty(); }
  std::uint64_t chunk_count() const;
  std::uint64_t page_count() const;
  friend bool operator==(const ContiguityHistogram&, const ContiguityHistogram&) = default;
};

ContiguityHistogram build_histogram(const std::vector<ContiguityChunk>& chunks);

enum class ContiguityKind { kSmall, kMedium, kLarge, kMixed };

std::string_view to_string(ContiguityKind kind);
/// Accepts "small", "medium", "large", "mixed". Throws ConfigError otherwise.
ContiguityKind parse_contiguity_kind(std::string_view name);

/// Size bands: small 1-63 pages, medium 64-511, large 512 and up.
enum class SizeBand { kSmall = 0, kMedium = 1, kLarge = 2 };
SizeBand band_of(std::uint64_t chunk_size);

/// Page-weighted share of each band, indexed by SizeBand.
std::array<double, 3> band_page_shares(const ContiguityHistogram& h);

/// Labels a histogram by the bands holding its contiguous pages. A band
/// counts when it holds at least `minority_threshold` of the pages; more than
/// one counting band is mixed. Throws Error("no contiguity") when empty.
ContiguityKind classify_contiguity(const ContiguityHistogram& h,
                                   double minority_threshold = 0.10);

/// Where the generator puts each chunk in the virtual address space.
enum class Placement {
  /// Chunks follow each other with one guard page between them.
  kPacked,
  /// Each chunk starts at a multiple of the smallest power of two that holds
  /// it, as a buddy-style allocator hands out blocks; at least one guard page
  /// still separates chunks.
  kBuddyAligned,
  /// Each chunk starts at a multiple of the window of its size range (2^4
  /// for 2-16 pages, 2^6 for 17-64, 2^7 up to 128, then one width per power
  /// of two), so a single aligned entry of that width can cover it.
  kSizeClass,
};

std::string_view to_string(Placement p);
/// Accepts "packed", "buddy" and "size-class". Throws ConfigError otherwise.
Placement parse_placement(std::string_view name);

/// Synthetic mapping with chunk sizes drawn uniformly from the kind's band
/// (small 1-63, medium 64-511, large 512-1024; mixed targets 0.4/0.4/0.2 of
/// pages). Each chunk gets a fresh physical run whose frame offset matches
/// the virtual offset modulo 512. Chunks are generated until at least
/// `total_pages` are mapped; `chunks_out`, when given, receives them.
PageTable generate_synthetic_mapping(ContiguityKind kind, std::uint64_t total_pages,
                                     std::uint64_t seed,
                                     Placement placement = Placement::kSizeClass,
                                     std::vector<ContiguityChunk>* chunks_out = nullptr);

/// Pagemap-style text dump: one "<vpn_hex> <ppn_hex> <rwx>" line per page,
/// sorted by VPN, '#' starts a comment.
PageTable read_mapping(std::istream& in);
PageTable load_mapping(const std::string& path);
void write_mapping(std::ostream& out, const PageTable& pt);
void save_mapping(const std::string& path, const PageTable& pt);

}  // namespace ktlb
