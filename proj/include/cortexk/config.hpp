#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cortexk/common.hpp"

namespace cortexk {

/// Key=value run configuration with provenance per entry, so bad values and
/// unknown keys are reported with their file and line.
class RunConfig {
 public:
  void set(const std::string& key, std::string value, int line = 0,
           std::string source = std::string());
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  /// Rejects any key outside `allowed`, naming each offender and where it
  /// was set.
  void require_known(const std::vector<std::string>& allowed) const;

  /// Overlays `stronger` on top of this config.
  void merge(const RunConfig& stronger);

  /// Sorted `key = value` lines.
  std::string serialize() const;

  std::vector<std::string> keys() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    std::string source;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const Entry& e,
                         const std::string& what) const;

  std::map<std::string, Entry> entries_;
};

/// `key = value` lines, '#' comments, blank lines allowed.
RunConfig parse_config_text(const std::string& text, const std::string& source);
RunConfig load_config_file(const std::filesystem::path& path);

std::string format_double(double v);

/// A named bundle of defaults bound to one CLI command.
struct Preset {
  std::string command;
  RunConfig config;
};

Preset preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace cortexk
