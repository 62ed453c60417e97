#include "levyhom/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace levyhom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries_[section + "/" + key].push_back(val);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  return entries_.count(section + "/" + key) > 0;
}

std::vector<std::string> Config::occurrences(const std::string& section,
                                             const std::string& key) const {
  auto it = entries_.find(section + "/" + key);
  return it == entries_.end() ? std::vector<std::string>{} : it->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  auto occ = occurrences(section, key);
  return occ.empty() ? fallback : occ.back();
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  auto occ = occurrences(section, key);
  if (occ.empty()) return fallback;
  try {
    return std::stod(occ.back());
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + section + "." + key + " is not a number: " +
                                occ.back());
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  auto occ = occurrences(section, key);
  if (occ.empty()) return fallback;
  try {
    return std::stoi(occ.back());
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + section + "." + key + " is not an integer: " +
                                occ.back());
  }
}

bool Config::get_flag(const std::string& section, const std::string& key, bool fallback) const {
  auto occ = occurrences(section, key);
  if (occ.empty()) return fallback;
  std::string v = occ.back();
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: " + section + "." + key + " is not a flag: " + v);
}

std::vector<double> Config::get_numbers(const std::string& section, const std::string& key) const {
  auto occ = occurrences(section, key);
  if (occ.empty())
    throw std::invalid_argument("config: missing required key " + section + "." + key);
  std::istringstream is(occ.back());
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  if (out.empty())
    throw std::invalid_argument("config: " + section + "." + key + " holds no numbers");
  return out;
}

std::vector<double> Config::get_numbers_or(const std::string& section, const std::string& key,
                                           std::vector<double> fallback) const {
  return has(section, key) ? get_numbers(section, key) : std::move(fallback);
}

std::vector<std::vector<double>> Config::get_rows(const std::string& section,
                                                  const std::string& key) const {
  std::vector<std::vector<double>> rows;
  for (const std::string& occ : occurrences(section, key)) {
    std::istringstream is(occ);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (row.empty())
      throw std::invalid_argument("config: " + section + "." + key + " holds an empty row");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace levyhom
