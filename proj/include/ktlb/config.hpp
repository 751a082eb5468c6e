#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ktlb {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Flat "key=value" run configuration; blank lines and '#' comments are
/// skipped. Throws ConfigError naming the line on malformed input.
ConfigEntries parse_config(std::istream& in);
ConfigEntries load_config(const std::string& path);

/// "--key=value" per entry, underscores in keys turned into dashes, so a
/// file can be replayed through the command-line parser ahead of the real
/// flags.
std::vector<std::string> config_to_args(const ConfigEntries& entries);

}  // namespace ktlb
