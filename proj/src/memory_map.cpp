#include "ktlb/memory_map.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace ktlb {

Perm Perm::parse(const std::string& s) {
  if (s.size() != 3) throw Error("permission must be three characters: '" + s + "'");
  static constexpr char kLetters[3] = {'r', 'w', 'x'};
  static constexpr std::uint8_t kBits[3] = {kRead, kWrite, kExec};
  Perm p{0};
  for (int i = 0; i < 3; ++i) {
    if (s[i] == kLetters[i]) {
      p.bits |= kBits[i];
    } else if (s[i] != '-') {
      throw Error("bad permission character in '" + s + "'");
    }
  }
  return p;
}

std::string Perm::str() const {
  std::string s = "---";
  if (bits & kRead) s[0] = 'r';
  if (bits & kWrite) s[1] = 'w';
  if (bits & kExec) s[2] = 'x';
  return s;
}

void PageTable::map(Vpn vpn, Ppn ppn, Perm perm) {
  const std::size_t before = entries_.size();
  entries_.emplace_hint(entries_.end(), vpn, PageMapping{vpn, ppn, perm});
  if (entries_.size() == before) {
    std::ostringstream msg;
    msg << "vpn 0x" << std::hex << vpn << " is already mapped";
    throw Error(msg.str());
  }
}

void PageTable::unmap(Vpn vpn) {
  if (entries_.erase(vpn) == 0) {
    std::ostringstream msg;
    msg << "vpn 0x" << std::hex << vpn << " is not mapped";
    throw Error(msg.str());
  }
}

std::vector<ContiguityChunk> scan_contiguity_chunks(const PageTable& pt) {
  std::vector<ContiguityChunk> chunks;
  const PageMapping* prev = nullptr;
  for (const auto& [vpn, m] : pt) {
    if (prev != nullptr && continues_run(*prev, m)) {
      ++chunks.back().size;
    } else {
      chunks.push_back({vpn, 1});
    }
    prev = &m;
  }
  return chunks;
}

std::uint64_t ContiguityHistogram::chunk_count() const {
  std::uint64_t n = 0;
  for (const auto& b : bins) n += b.freq;
  return n;
}

std::uint64_t ContiguityHistogram::page_count() const {
  std::uint64_t n = 0;
  for (const auto& b : bins) n += b.size * b.freq;
  return n;
}

ContiguityHistogram build_histogram(const std::vector<ContiguityChunk>& chunks) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& c : chunks) ++counts[c.size];
  ContiguityHistogram h;
  h.bins.reserve(counts.size());
  for (const auto& [size, freq] : counts) h.bins.push_back({size, freq});
  return h;
}

std::string_view to_string(ContiguityKind kind) {
  switch (kind) {
    case ContiguityKind::kSmall: return "small";
    case ContiguityKind::kMedium: return "medium";
    case ContiguityKind::kLarge: return "large";
    case ContiguityKind::kMixed: return "mixed";
  }
  return "?";
}

ContiguityKind parse_contiguity_kind(std::string_view name) {
  if (name == "small") return ContiguityKind::kSmall;
  if (name == "medium") return ContiguityKind::kMedium;
  if (name == "large") return ContiguityKind::kLarge;
  if (name == "mixed") return ContiguityKind::kMixed;
  throw ConfigError("unknown contiguity kind '" + std::string(name) + "'");
}

SizeBand band_of(std::uint64_t chunk_size) {
  if (chunk_size < 64) return SizeBand::kSmall;
  if (chunk_size < 512) return SizeBand::kMedium;
  return SizeBand::kLarge;
}

std::array<double, 3> band_page_shares(const ContiguityHistogram& h) {
  std::array<double, 3> pages{};
  for (const auto& b : h.bins) {
    pages[static_cast<int>(band_of(b.size))] += static_cast<double>(b.size * b.freq);
  }
  const double total = pages[0] + pages[1] + pages[2];
  if (total > 0) {
    for (auto& p : pages) p /= total;
  }
  return pages;
}

ContiguityKind classify_contiguity(const ContiguityHistogram& h, double minority_threshold) {
  if (h.empty()) throw Error("no contiguity");
  const auto shares = band_page_shares(h);
  int counting = 0;
  int best = 0;
  for (int b = 0; b < 3; ++b) {
    if (shares[b] >= minority_threshold) ++counting;
    if (shares[b] > shares[best]) best = b;
  }
  if (counting > 1) return ContiguityKind::kMixed;
  return static_cast<ContiguityKind>(best);
}

namespace {

struct BandRange {
  std::uint64_t lo;
  std::uint64_t hi;
};

constexpr BandRange kBandRanges[3] = {{1, 63}, {64, 511}, {512, 1024}};
constexpr double kMixedTargets[3] = {0.4, 0.4, 0.2};

constexpr Vpn kFirstVpn = 0x40000;
constexpr Ppn kFirstPpn = 0x100000;

// Picks the band furthest below its page-weight target.
int pick_mixed_band(const std::array<std::uint64_t, 3>& band_pages) {
  const double total = static_cast<double>(band_pages[0] + band_pages[1] + band_pages[2]);
  int best = 0;
  double best_deficit = -1e300;
  for (int b = 0; b < 3; ++b) {
    const double deficit = kMixedTargets[b] * total - static_cast<double>(band_pages[b]);
    if (deficit > best_deficit) {
      best_deficit = deficit;
      best = b;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::kPacked: return "packed";
    case Placement::kBuddyAligned: return "buddy";
    case Placement::kSizeClass: return "size-class";
  }
  return "?";
}

Placement parse_placement(std::string_view name) {
  if (name == "packed") return Placement::kPacked;
  if (name == "buddy") return Placement::kBuddyAligned;
  if (name == "size-class") return Placement::kSizeClass;
  throw ConfigError("unknown placement '" + std::string(name) + "'");
}

PageTable generate_synthetic_mapping(ContiguityKind kind, std::uint64_t total_pages,
                                     std::uint64_t seed, Placement placement,
                                     std::vector<ContiguityChunk>* chunks_out) {
  if (total_pages < 1024) throw ConfigError("synthetic mapping needs at least 1024 pages");
  std::mt19937_64 rng(seed);
  PageTable pt;
  std::array<std::uint64_t, 3> band_pages{};
  std::uint64_t mapped = 0;
  Vpn vpn = kFirstVpn;
  Ppn ppn_cursor = kFirstPpn;
  if (chunks_out) chunks_out->clear();

  while (mapped < total_pages) {
    int band = 0;
    switch (kind) {
      case ContiguityKind::kSmall: band = 0; break;
      case ContiguityKind::kMedium: band = 1; break;
      case ContiguityKind::kLarge: band = 2; break;
      case ContiguityKind::kMixed: band = pick_mixed_band(band_pages); break;
    }
    std::uniform_int_distribution<std::uint64_t> size_dist(kBandRanges[band].lo,
                                                           kBandRanges[band].hi);
    const std::uint64_t size = size_dist(rng);
    if (placement != Placement::kPacked) {
      Vpn block = std::bit_ceil(size);
      if (placement == Placement::kSizeClass) block = size <= 16 ? 16 : size <= 64 ? 64 : block;
      vpn = (vpn + block - 1) & ~(block - 1);
    }

    // Fresh physical run, congruent with the virtual start modulo 512.
    Ppn ppn = ppn_cursor + ((vpn - ppn_cursor) & (kHugePages - 1));
    for (std::uint64_t i = 0; i < size; ++i) pt.map(vpn + i, ppn + i);
    if (chunks_out) chunks_out->push_back({vpn, size});

    ppn_cursor = ppn + size + 1;
    vpn += size + 1;  // guard page
    band_pages[band] += size;
    mapped += size;
  }
  return pt;
}

PageTable read_mapping(std::istream& in) {
  PageTable pt;
  std::string line;
  std::size_t lineno = 0;
  bool have_prev = false;
  Vpn prev = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string vpn_s, ppn_s, perm_s, extra;
    if (!(fields >> vpn_s)) continue;
    if (!(fields >> ppn_s >> perm_s) || (fields >> extra)) {
      throw FormatError("expected '<vpn_hex> <ppn_hex> <rwx>'", lineno);
    }
    Vpn vpn = 0;
    Ppn ppn = 0;
    Perm perm;
    try {
      std::size_t used = 0;
      vpn = std::stoull(vpn_s, &used, 16);
      if (used != vpn_s.size()) throw std::invalid_argument("vpn");
      ppn = std::stoull(ppn_s, &used, 16);
      if (used != ppn_s.size()) throw std::invalid_argument("ppn");
      perm = Perm::parse(perm_s);
    } catch (const std::exception&) {
      throw FormatError("malformed mapping line", lineno);
    }
    if (have_prev && vpn == prev) throw FormatError("duplicate vpn", lineno);
    if (have_prev && vpn < prev) throw FormatError("vpn out of order", lineno);
    pt.map(vpn, ppn, perm);
    prev = vpn;
    have_prev = true;
  }
  return pt;
}

PageTable load_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mapping file '" + path + "'");
  return read_mapping(in);
}

void write_mapping(std::ostream& out, const PageTable& pt) {
  out << "# vpn ppn perm\n" << std::hex;
  for (const auto& [vpn, m] : pt) out << vpn << ' ' << m.ppn << ' ' << m.perm.str() << '\n';
  out << std::dec;
}

void save_mapping(const std::string& path, const PageTable& pt) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mapping file '" + path + "'");
  write_mapping(out, pt);
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace ktlb
