#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rotlab/dynamics.hpp"

namespace rotlab::config {

// Flat "key = value" text with [section] headers and '#' comments.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& source = "config");
  static ConfigFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  double get_real(const std::string& section, const std::string& key,
                  std::optional<double> fallback = std::nullopt) const;
  long long get_int(const std::string& section, const std::string& key,
                    std::optional<long long> fallback = std::nullopt) const;
  bool get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::vector<double> get_reals(const std::string& section, const std::string& key) const;

  std::vector<std::string> keys(const std::string& section) const;
  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
  // Config error naming the first key of the section outside `allowed`.
  void require_known(const std::string& section, const std::set<std::string>& allowed) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  // sorted, normalized text; the config hash is taken over this
  std::string canonical() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const;
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

// 64-bit FNV-1a, hex encoded
std::string fnv1a_hex(const std::string& bytes);

dynamics::MapSpec map_spec_from(const ConfigFile& cfg, const std::string& section = "map");
std::string map_spec_text(const dynamics::MapSpec& spec);
dynamics::MapSpec parse_map_spec_text(const std::string& text);

}  // namespace rotlab::config
