#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ktlb/aligned_ptes.hpp"
#include "ktlb/memory_map.hpp"

namespace ktlb {

enum class TraceOp : std::uint8_t { kRead = 0, kWrite = 1, kUnmap = 2 };

/// One trace record. For reads and writes `address` is a virtual byte
/// address; for an unmap event it is the VPN being unmapped.
struct TraceRecord {
  std::uint64_t address = 0;
  TraceOp op = TraceOp::kRead;

  Vpn vpn() const { return op == TraceOp::kUnmap ? address : address >> kPageShift; }
  bool is_access() const { return op != TraceOp::kUnmap; }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct AccessTrace {
  std::vector<TraceRecord> records;
  /// Memory accesses per instruction, for per-instruction cycle figures.
  double accesses_per_instruction = 0.3;

  std::uint64_t access_count() const;
  std::uint64_t event_count() const { return records.size() - access_count(); }
  friend bool operator==(const AccessTrace&, const AccessTrace&) = default;
};

/// Text form: one record per line, "<hex address> <r|w>" or
/// "unmap <hex vpn>"; '#' starts a comment. Malformed lines raise
/// FormatError with the line number.
AccessTrace read_text_trace(std::istream& in);
void write_text_trace(std::ostream& out, const AccessTrace& trace);

/// Binary form: the 9-byte magic "TLBTRACE1", then per record an 8-byte
/// little-endian address and a 1-byte op (0 read, 1 write, 2 unmap).
AccessTrace read_binary_trace(std::istream& in);
void write_binary_trace(std::ostream& out, const AccessTrace& trace);

/// Detects the binary magic, otherwise parses text.
AccessTrace load_trace(const std::string& path);
/// Binary when `binary`, else text.
void save_trace(const std::string& path, const AccessTrace& trace, bool binary = false);

/// Checks every access against the mapping, applying unmap events in order.
/// Throws TraceIntegrityError naming the first bad record.
void validate_trace(const PageTable& pt, const AccessTrace& trace);

enum class TracePattern {
  kSequential,   // every chunk front to back, chunks in address order
  kStrided,      // fixed page stride over all mapped pages
  kRandom,       // uniform over mapped pages
  kZipf,         // bursts inside chunks picked by a Zipf law over chunks
  kAlternating,  // cycles through aligned regions of different widths
};

std::string_view to_string(TracePattern p);
/// Throws ConfigError for an unknown name.
TracePattern parse_trace_pattern(std::string_view name);

struct TraceOptions {
  TracePattern pattern = TracePattern::kZipf;
  std::uint64_t length = 1'000'000;
  std::uint64_t seed = 1;
  double write_fraction = 0.3;
  std::uint64_t stride = 17;
  double zipf_alpha = 1.0;
  /// Scale each chunk's Zipf weight by its size, so hot memory rather than
  /// hot chunks follows the law.
  bool zipf_page_weighted = true;
  /// Pages touched per Zipf pick.
  std::uint64_t burst = 16;
  /// Widths for kAlternating; chosen from the mapping when empty.
  std::optional<AlignmentSet> widths;
  /// Emit an unmap event after this many accesses (0 = never). Later
  /// accesses avoid unmapped pages.
  std::uint64_t unmap_every = 0;
  double accesses_per_instruction = 0.3;
};

/// Deterministic for fixed options. Throws ConfigError on an empty mapping
/// or when kAlternating finds fewer than two usable widths.
AccessTrace generate_trace(const PageTable& pt, const TraceOptions& options);

}  // namespace ktlb
