#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rotlab/config.hpp"
#include "rotlab/error.hpp"

namespace rotlab::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile c;
  c.source_ = source;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return source + ":" + std::to_string(lineno); };
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw Error(ErrorKind::Config, "config", where() + ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      c.sections_[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "config", where() + ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::Config, "config", where() + ": empty key");
    auto& sec = c.sections_[section];
    if (sec.count(key))
      throw Error(ErrorKind::Config, "config", where() + ": duplicate key '" + key + "' in [" + section + "]");
    sec[key] = Entry{value, lineno};
  }
  return c;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void ConfigFile::fail(const std::string& section, const std::string& key, const std::string& msg) const {
  const Entry* e = find(section, key);
  std::string at = e ? source_ + ":" + std::to_string(e->line) + ": " : source_ + ": ";
  throw Error(ErrorKind::Config, "config", at + "[" + section + "] " + key + ": " + msg);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   std::optional<std::string> fallback) const {
  if (const Entry* e = find(section, key)) return e->value;
  if (!fallback) fail(section, key, "missing required field");
  return *fallback;
}

double ConfigFile::get_real(const std::string& section, const std::string& key, std::optional<double> fallback) const {
  const Entry* e = find(section, key);
  if (!e) {
    if (!fallback) fail(section, key, "missing required field");
    return *fallback;
  }
  try {
    std::size_t used = 0;
    double v = std::stod(e->value, &used);
    if (used == e->value.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail(section, key, "expected a finite real, got '" + e->value + "'");
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              std::optional<long long> fallback) const {
  const Entry* e = find(section, key);
  if (!e) {
    if (!fallback) fail(section, key, "missing required field");
    return *fallback;
  }
  try {
    std::size_t used = 0;
    long long v = std::stoll(e->value, &used);
    if (used == e->value.size()) return v;
  } catch (const std::exception&) {
  }
  fail(section, key, "expected an integer, got '" + e->value + "'");
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback) const {
  const Entry* e = find(section, key);
  if (!e) {
    if (!fallback) fail(section, key, "missing required field");
    return *fallback;
  }
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(section, key, "expected true/false, got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_reals(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  std::string s = get_string(section, key);
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(section, key, "expected a list of reals, got '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto s = sections_.find(section);
  if (s != sections_.end())
    for (const auto& [k, v] : s->second) out.push_back(k);
  return out;
}

void ConfigFile::require_known(const std::string& section, const std::set<std::string>& allowed) const {
  for (const std::string& k : keys(section))
    if (!allowed.count(k)) fail(section, k, "unknown field");
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = Entry{value, 0};
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& [name, sec] : sections_) {
    out += "[" + name + "]\n";
    for (const auto& [k, e] : sec) out += k + " = " + e.value + "\n";
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

dynamics::MapSpec map_spec_from(const ConfigFile& cfg, const std::string& section) {
  dynamics::MapSpec s;
  s.family = cfg.get_string(section, "family");
  for (const std::string& k : cfg.keys(section))
    if (k != "family") s.params[k] = cfg.get_string(section, k);
  return s;
}

std::string map_spec_text(const dynamics::MapSpec& spec) {
  std::string out = "[map]\nfamily = " + spec.family + "\n";
  for (const auto& [k, v] : spec.params) out += k + " = " + v + "\n";
  return out;
}

dynamics::MapSpec parse_map_spec_text(const std::string& text) {
  return map_spec_from(ConfigFile::parse(text, "map-spec"));
}

}  // namespace rotlab::config
