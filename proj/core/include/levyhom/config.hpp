#pragma once

#include <map>
#include <string>
#include <vector>

namespace levyhom {

/// Flat key-value configuration with [section] headers. Repeated keys
/// accumulate in file order (used for term lists); '#' starts a comment.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  /// All occurrences of section.key, raw value strings.
  std::vector<std::string> occurrences(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_flag(const std::string& section, const std::string& key, bool fallback) const;

  /// Whitespace-separated numbers from a single occurrence.
  std::vector<double> get_numbers(const std::string& section, const std::string& key) const;
  std::vector<double> get_numbers_or(const std::string& section, const std::string& key,
                                     std::vector<double> fallback) const;

  /// One number row per occurrence of the key.
  std::vector<std::vector<double>> get_rows(const std::string& section,
                                            const std::string& key) const;

 private:
  // key: "section/key" -> values in file order
  std::map<std::string, std::vector<std::string>> entries_;
};

}  // namespace levyhom
