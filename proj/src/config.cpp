#include "mh/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mh/errors.hpp"

namespace mh::config {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name_ = name;
  cfg.hash_ = fnv1a64(text);
  cfg.parse(text);
  return cfg;
}

void Config::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  sections_[section];  // the unnamed section always exists
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // '#' starts a comment anywhere on the line; values never contain '#'.
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = name_ + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(where + ": unterminated section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      if (sections_.count(section)) {
        throw ConfigError(where + ": duplicate section [" + section + "]");
      }
      sections_[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    auto& sec = sections_[section];
    if (sec.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' in section [" +
                        section + "]");
    }
    sec[key] = Entry{value, lineno};
  }
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool Config::has_key(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

const std::string& Config::raw(const std::string& section,
                               const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) {
    throw ConfigError(name_ + ": missing section [" + section + "]");
  }
  auto kt = it->second.find(key);
  if (kt == it->second.end()) {
    throw ConfigError(name_ + ": missing key '" + key + "' in section [" +
                      section + "]");
  }
  return kt->second.value;
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  out.reserve(sections_.size());
  for (const auto& [name, entries] : sections_) out.push_back(name);
  return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& [key, entry] : it->second) out.push_back(key);
  return out;
}

int Config::line_of(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return 0;
  auto kt = it->second.find(key);
  return kt == it->second.end() ? 0 : kt->second.line;
}

SectionReader::SectionReader(const Config& cfg, std::string section)
    : cfg_(cfg), section_(std::move(section)) {}

bool SectionReader::has(const std::string& key) const {
  return cfg_.has_key(section_, key);
}

const std::string& SectionReader::fetch(const std::string& key) {
  consumed_[key] = true;
  return cfg_.raw(section_, key);
}

void SectionReader::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(cfg_.name() + ":" +
                    std::to_string(cfg_.line_of(section_, key)) + ": key '" +
                    key + "' in section [" + section_ + "] " + what);
}

std::string SectionReader::get_string(const std::string& key) {
  return fetch(key);
}

std::string SectionReader::get_string(const std::string& key,
                                      const std::string& fallback) {
  return has(key) ? fetch(key) : fallback;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

bool parse_ll(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  if (s.empty()) return parts;
  size_t pos = 0;
  while (true) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return parts;
}

std::string trim_copy(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

double SectionReader::get_double(const std::string& key) {
  const std::string& v = fetch(key);
  double out = 0;
  if (!parse_double(v, out)) fail(key, "is not a number: '" + v + "'");
  return out;
}

double SectionReader::get_double(const std::string& key, double fallback) {
  return has(key) ? get_double(key) : fallback;
}

long long SectionReader::get_int(const std::string& key) {
  const std::string& v = fetch(key);
  long long out = 0;
  if (!parse_ll(v, out)) fail(key, "is not an integer: '" + v + "'");
  return out;
}

long long SectionReader::get_int(const std::string& key, long long fallback) {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t SectionReader::get_u64(const std::string& key) {
  const std::string& v = fetch(key);
  std::uint64_t out = 0;
  if (!parse_u64(v, out)) fail(key, "is not an unsigned integer: '" + v + "'");
  return out;
}

std::uint64_t SectionReader::get_u64(const std::string& key,
                                     std::uint64_t fallback) {
  return has(key) ? get_u64(key) : fallback;
}

bool SectionReader::get_bool(const std::string& key) {
  const std::string& v = fetch(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(key, "is not a boolean (use true/false): '" + v + "'");
}

bool SectionReader::get_bool(const std::string& key, bool fallback) {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<double> SectionReader::get_double_list(const std::string& key) {
  const std::string& v = fetch(key);
  std::vector<double> out;
  for (const auto& part : split_list(v)) {
    double x = 0;
    if (!parse_double(trim_copy(part), x)) {
      fail(key, "has a non-numeric list entry: '" + part + "'");
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> SectionReader::get_double_list(
    const std::string& key, const std::vector<double>& fallback) {
  return has(key) ? get_double_list(key) : fallback;
}

std::vector<long long> SectionReader::get_int_list(const std::string& key) {
  const std::string& v = fetch(key);
  std::vector<long long> out;
  for (const auto& part : split_list(v)) {
    long long x = 0;
    if (!parse_ll(trim_copy(part), x)) {
      fail(key, "has a non-integer list entry: '" + part + "'");
    }
    out.push_back(x);
  }
  return out;
}

std::vector<long long> SectionReader::get_int_list(
    const std::string& key, const std::vector<long long>& fallback) {
  return has(key) ? get_int_list(key) : fallback;
}

void SectionReader::finish() const {
  if (!cfg_.has_section(section_)) return;
  std::vector<std::string> unknown;
  for (const auto& key : cfg_.keys(section_)) {
    if (!consumed_.count(key)) unknown.push_back(key);
  }
  if (unknown.empty()) return;
  std::string msg = cfg_.name() + ": unknown key";
  if (unknown.size() > 1) msg += "s";
  msg += " in section [" + section_ + "]:";
  for (const auto& k : unknown) {
    msg += " '" + k + "' (line " + std::to_string(cfg_.line_of(section_, k)) + ")";
  }
  throw ConfigError(msg);
}

}  // namespace mh::config
