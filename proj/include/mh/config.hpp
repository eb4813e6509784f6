#ifndef MH_CONFIG_HPP
#define MH_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mh::config {

// 64-bit FNV-1a over raw bytes.  Used to stamp every report row with a
// fingerprint of the exact configuration that produced it.
std::uint64_t fnv1a64(const std::string& data);

// Fixed-width lowercase hex rendering of a 64-bit hash.
std::string hash_hex(std::uint64_t h);

// Flat key-value configuration file:
//
//   # comment
//   experiment = simulate
//   [hamiltonian]
//   kind = logcosh
//   eta  = 0.05
//
// Keys before the first section header live in the unnamed section "".
// Duplicate sections and duplicate keys within a section are rejected so a
// stray copy-paste cannot silently shadow an earlier value.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& name);

  bool has_section(const std::string& section) const;
  bool has_key(const std::string& section, const std::string& key) const;

  // Raw string value; throws ConfigError (with file:line of the section or
  // file name) when the key is absent.
  const std::string& raw(const std::string& section, const std::string& key) const;

  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

  // Source line of a key, for error messages.
  int line_of(const std::string& section, const std::string& key) const;

  const std::string& name() const { return name_; }
  std::uint64_t content_hash() const { return hash_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string name_;
  std::uint64_t hash_ = 0;
  std::map<std::string, std::map<std::string, Entry>> sections_;

  void parse(const std::string& text);
};

// Typed accessor over one section that records which keys were read.  After a
// command has pulled everything it understands, finish() rejects the
// leftovers, so misspelled keys fail loudly instead of being ignored.
class SectionReader {
 public:
  SectionReader(const Config& cfg, std::string section);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);

  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);

  long long get_int(const std::string& key);
  long long get_int(const std::string& key, long long fallback);

  std::uint64_t get_u64(const std::string& key);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);

  bool get_bool(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);

  // Comma-separated lists; empty value parses to an empty list.
  std::vector<double> get_double_list(const std::string& key);
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback);
  std::vector<long long> get_int_list(const std::string& key);
  std::vector<long long> get_int_list(const std::string& key,
                                      const std::vector<long long>& fallback);

  // Throws ConfigError naming every key in the section that was never read.
  void finish() const;

 private:
  const Config& cfg_;
  std::string section_;
  std::map<std::string, bool> consumed_;

  const std::string& fetch(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

}  // namespace mh::config

#endif  // MH_CONFIG_HPP
