#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqlab::runner {

/// Bad key, bad value or unreadable config file. Maps to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct OptionSpec {
  std::string key;
  std::string default_value;
  std::string help;
  bool flag = false;  ///< boolean switch on the command line
};

/// Flat key=value configuration for one subcommand. Lists are comma
/// separated. Only keys declared in the spec list are accepted.
class ExperimentConfig {
 public:
  ExperimentConfig(std::string subcommand, std::vector<OptionSpec> specs);

  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; '#' starts a comment.
  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& origin = "<text>");

  [[nodiscard]] const std::string& subcommand() const { return subcommand_; }
  [[nodiscard]] const std::vector<OptionSpec>& specs() const { return specs_; }
  [[nodiscard]] bool has(const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& key) const;
  [[nodiscard]] std::size_t get_size(const std::string& key) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key) const;
  [[nodiscard]] bool get_bool(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> get_list(const std::string& key) const;
  [[nodiscard]] std::vector<std::size_t> get_size_list(const std::string& key) const;
  [[nodiscard]] std::vector<double> get_double_list(const std::string& key) const;

  /// "subcommand=... key=value ..." in declaration order.
  [[nodiscard]] std::string resolved() const;

 private:
  const std::string& raw(const std::string& key) const;

  std::string subcommand_;
  std::vector<OptionSpec> specs_;
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace seqlab::runner
