#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace incagg {

/// Flat `key=value` configuration. `#` starts a comment; blank lines are
/// ignored. Typed getters throw ParseError naming the key's line.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Keys starting with `prefix`, with the prefix stripped.
  KeyValueConfig with_prefix(const std::string& prefix) const;
  /// Keys not in `known`, for typo detection.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::string source_ = "<config>";
  std::map<std::string, Entry> entries_;
};

}  // namespace incagg
