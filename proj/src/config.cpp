#include "cortexk/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cortexk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return std::string();
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(key.front())) &&
      key.front() != '_')
    return false;
  for (char ch : key)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_')
      return false;
  return true;
}

std::string where(const std::string& source, int line) {
  if (source.empty()) return std::string();
  std::string w = " (" + source;
  if (line > 0) w += ":" + std::to_string(line);
  w += ")";
  return w;
}

}  // namespace

void RunConfig::set(const std::string& key, std::string value, int line,
                    std::string source) {
  if (!valid_key(key))
    throw ConfigError("invalid configuration key '" + key + "'" +
                      where(source, line));
  entries_[key] = Entry{std::move(value), line, std::move(source)};
}

bool RunConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const RunConfig::Entry* RunConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void RunConfig::fail(const std::string& key, const Entry& e,
                     const std::string& what) const {
  throw ConfigError("key '" + key + "': " + what + ", got '" + e.value + "'" +
                    where(e.source, e.line));
}

std::string RunConfig::get_string(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw ConfigError("missing required key '" + key + "'");
  return e->value;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument(e->value);
    return v;
  } catch (const std::exception&) {
    fail(key, *e, "expected a number");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    size_t used = 0;
    const int v = std::stoi(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument(e->value);
    return v;
  } catch (const std::exception&) {
    fail(key, *e, "expected an integer");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(e->value, &used);
    if (used != e->value.size()) throw std::invalid_argument(e->value);
    return v;
  } catch (const std::exception&) {
    fail(key, *e, "expected an unsigned integer");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const std::string& v = e->value;
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  fail(key, *e, "expected a boolean (true/false/1/0/on/off/yes/no)");
}

std::vector<double> RunConfig::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  std::stringstream ss(e->value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    try {
      size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(key, *e, "expected comma-separated numbers");
    }
  }
  if (out.empty()) fail(key, *e, "expected at least one number");
  return out;
}

void RunConfig::require_known(const std::vector<std::string>& allowed) const {
  std::string bad;
  for (const auto& [key, e] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end())
      continue;
    if (!bad.empty()) bad += "; ";
    bad += "'" + key + "'" + where(e.source, e.line);
  }
  if (!bad.empty()) throw ConfigError("unknown configuration keys: " + bad);
}

void RunConfig::merge(const RunConfig& stronger) {
  for (const auto& [key, e] : stronger.entries_) entries_[key] = e;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [key, e] : entries_) {
    out += key;
    out += " = ";
    out += e.value;
    out += '\n';
  }
  return out;
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(key);
  return out;
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& source) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'" + std::string(" (") + source +
                        ":" + std::to_string(lineno) + ")");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (cfg.has(key))
      throw ConfigError("duplicate key '" + key + "' (" + source + ":" +
                        std::to_string(lineno) + ")");
    cfg.set(key, value, lineno, source);
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::stod(probe) == v) return probe;
  }
  return buf;
}

namespace {

RunConfig preset_from_pairs(
    std::initializer_list<std::pair<const char*, const char*>> pairs,
    const std::string& name) {
  RunConfig cfg;
  for (const auto& [k, v] : pairs) cfg.set(k, v, 0, "preset " + name);
  return cfg;
}

}  // namespace

Preset preset_config(const std::string& name) {
  if (name == "fig-diffK") {
    return Preset{"propagate",
                  preset_from_pairs({{"bank", "gabor"},
                                     {"lambda", "1"},
                                     {"sigma", "0.5"},
                                     {"x_half", "1.5"},
                                     {"x_step", "0.1"},
                                     {"y_half", "3"},
                                     {"y_step", "0.1"},
                                     {"theta_half", "1.5"},
                                     {"theta_step", "0.15"},
                                     {"x0", "0"},
                                     {"y0", "0"},
                                     {"theta0", "0"},
                                     {"steps", "4"},
                                     {"init", "transition"},
                                     {"truncate", "true"},
                                     {"tau", "0"},
                                     {"threshold_quantile", "0.9"},
                                     {"glyph_size", "17"},
                                     {"glyph_stride", "2"},
                                     {"glyph_scale", "8"}},
                                    name)};
  }
  if (name == "fig-pw") {
    return Preset{"pinwheel",
                  preset_from_pairs({{"lambda", "1"},
                                     {"sigma", "0.5"},
                                     {"map_width", "65"},
                                     {"map_height", "65"},
                                     {"map_spacing", "0.25"},
                                     {"map_m", "30"},
                                     {"map_k", "1.2566370614359172"},
                                     {"seed", "7"},
                                     {"steps", "6"},
                                     {"x0", "0"},
                                     {"y0", "0"},
                                     {"truncate", "false"},
                                     {"tau", "0"},
                                     {"threshold_quantile", "0.9"}},
                                    name)};
  }
  if (name == "fig-curvature") {
    return Preset{"endstop",
                  preset_from_pairs({{"lambda", "1"},
                                     {"sigma", "0.5"},
                                     {"es_width", "0.5"},
                                     {"es_short_lengths", "1.6,1.1,0.7"},
                                     {"es_long_lengths", "2.6,1.9,1.3"},
                                     {"cs", "2"},
                                     {"cl", "1"},
                                     {"include_plain", "true"},
                                     {"orientations", "21"},
                                     {"x_half", "3"},
                                     {"x_step", "0.15"},
                                     {"y_half", "3"},
                                     {"y_step", "0.15"},
                                     {"steps", "1"},
                                     {"init", "raw"},
                                     {"truncate", "false"},
                                     {"tau", "0"},
                                     {"threshold_quantile", "0.9"},
                                     {"glyph_size", "13"},
                                     {"glyph_stride", "1"},
                                     {"glyph_scale", "10"}},
                                    name)};
  }
  if (name == "fig-kernel-spt") {
    return Preset{"spatiotemporal",
                  preset_from_pairs({{"lambda", "1"},
                                     {"sigma", "0.5"},
                                     {"beta", "1"},
                                     {"alpha0", "0"},
                                     {"x_half", "1"},
                                     {"x_step", "0.1"},
                                     {"y_half", "1"},
                                     {"y_step", "0.1"},
                                     {"theta_half", "1.5"},
                                     {"theta_step", "0.15"},
                                     {"alpha_half", "1"},
                                     {"alpha_step", "0.1"},
                                     {"c_family", "false"}},
                                    name)};
  }
  if (name == "fig-sparse-laf") {
    return Preset{"kernel",
                  preset_from_pairs({{"bank", "learned"},
                                     {"bank_count", "128"},
                                     {"bank_size", "16"},
                                     {"bank_pad", "5"},
                                     {"bank_crop", "11"},
                                     {"bank_delta", "1"},
                                     {"normalize_bank", "true"},
                                     {"seed", "11"},
                                     {"filter", "0"},
                                     {"truncate", "false"},
                                     {"threshold_quantile", "0.9"},
                                     {"glyph_size", "11"},
                                     {"glyph_stride", "1"},
                                     {"glyph_scale", "12"}},
                                    name)};
  }
  throw ConfigError("unknown preset '" + name + "' (available: fig-diffK, " +
                    "fig-pw, fig-curvature, fig-kernel-spt, fig-sparse-laf)");
}

std::vector<std::string> preset_names() {
  return {"fig-diffK", "fig-pw", "fig-curvature", "fig-kernel-spt",
          "fig-sparse-laf"};
}

}  // namespace cortexk
