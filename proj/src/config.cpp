#include "ktlb/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "ktlb/types.hpp"

namespace ktlb {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigEntries parse_config(std::istream& in) {
  ConfigEntries entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    std::string key = eq == std::string::npos ? std::string() : trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return entries;
}

ConfigEntries load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::vector<std::string> config_to_args(const ConfigEntries& entries) {
  std::vector<std::string> args;
  for (const auto& [key, value] : entries) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    args.push_back("--" + flag + "=" + value);
  }
  return args;
}

}  // namespace ktlb
