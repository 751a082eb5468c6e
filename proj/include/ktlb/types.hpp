#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ktlb {

/// Virtual and physical page numbers for 4 KiB pages.
using Vpn = std::uint64_t;
using Ppn = std::uint64_t;

inline constexpr unsigned kPageShift = 12;
inline constexpr std::uint64_t kPageSize = std::uint64_t{1} << kPageShift;

/// Pages in a 2 MiB huge page.
inline constexpr unsigned kHugeShift = 9;
inline constexpr std::uint64_t kHugePages = std::uint64_t{1} << kHugeShift;

/// r/w/x permission triple packed as a bit mask.
struct Perm {
  static constexpr std::uint8_t kRead = 1;
  static constexpr std::uint8_t kWrite = 2;
  static constexpr std::uint8_t kExec = 4;

  std::uint8_t bits = kRead | kWrite;

  friend bool operator==(Perm, Perm) = default;

  /// Parses the three-character "rwx" form, '-' for a cleared bit.
  static Perm parse(const std::string& s);
  std::string str() const;
};

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line (or record) number.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Invalid run configuration or parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An access or event disagrees with the mapping (for example, an access to
/// an unmapped page). Carries the offending access index.
class TraceIntegrityError : public Error {
 public:
  TraceIntegrityError(const std::string& what, std::size_t index)
      : Error(what + " (access " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ktlb
