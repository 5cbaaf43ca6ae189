#include "config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace seqlab::runner {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("config: '" + key + "' expects a finite number, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ExperimentConfig::ExperimentConfig(std::string subcommand, std::vector<OptionSpec> specs)
    : subcommand_(std::move(subcommand)), specs_(std::move(specs)) {
  for (const auto& s : specs_) values_[s.key] = s.default_value;
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) != 0; }

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("config: unknown key '" + key + "' for subcommand " + subcommand_);
  }
  it->second = trim(value);
}

void ExperimentConfig::load_text(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    set(key, trim(std::string_view(t).substr(eq + 1)));
  }
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

const std::string& ExperimentConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: no key '" + key + "' in " + subcommand_);
  return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key) const { return raw(key); }

double ExperimentConfig::get_double(const std::string& key) const { return parse_double(key, raw(key)); }

std::size_t ExperimentConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(parse_u64(key, raw(key)));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const { return parse_u64(key, raw(key)); }

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key) const {
  auto out = split_list(raw(key));
  if (out.empty()) throw ConfigError("config: '" + key + "' must not be empty");
  return out;
}

std::vector<std::size_t> ExperimentConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : get_list(key)) out.push_back(static_cast<std::size_t>(parse_u64(key, s)));
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) out.push_back(parse_double(key, s));
  return out;
}

std::string ExperimentConfig::resolved() const {
  std::string out = "subcommand=" + subcommand_;
  for (const auto& s : specs_) {
    const std::string& v = values_.at(s.key);
    out += ' ' + s.key + '=' + (v.find(' ') == std::string::npos ? v : '"' + v + '"');
  }
  return out;
}

}  // namespace seqlab::runner
