#pragma once

// Sectioned key-value run configuration:
//
//   # comment
//   [scenario]
//   name = ou_relax
//   seed = 42
//   [parameters]
//   omega = 1.0
//   horizons = 10, 100, 1000
//   [output]
//   dir = runs/ou
//
// Values are integers, decimals, booleans (true/false), strings (bare or
// double-quoted) and comma-separated number lists. Parsing reports every
// problem it finds, each tagged with its line number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "stochspin/csv.hpp"
#include "stochspin/error.hpp"

namespace stochspin::experiment {

enum class ValueType { integer, real, boolean, string, real_list };

inline const char* to_string(ValueType t) noexcept {
  switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::real: return "real";
    case ValueType::boolean: return "bool";
    case ValueType::string: return "string";
    case ValueType::real_list: return "list";
  }
  return "?";
}

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<double>>;

struct ConfigIssue {
  std::size_t line = 0;  // 0 when the problem has no single source line
  std::string section;
  std::string key;
  std::string message;

  std::string to_string() const {
    std::string s = "line " + std::to_string(line) + ": [" + section + "]";
    if (!key.empty()) s += " " + key;
    return s + ": " + message;
  }
};

struct Param {
  Value value;
  /// Text as written in the file, or the catalogue default.
  std::string text;
  bool defaulted = false;
  std::size_t line = 0;
};

class ParamMap {
 public:
  void set(const std::string& key, Param p) { map_[key] = std::move(p); }
  bool contains(const std::string& key) const { return map_.count(key) > 0; }
  const Param& at(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError("parameter '" + key + "' is not defined for this scenario");
    return it->second;
  }

  double real(const std::string& key) const {
    const Value& v = at(key).value;
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError("parameter '" + key + "' is not a number");
  }
  std::int64_t integer(const std::string& key) const { return get<std::int64_t>(key, "an integer"); }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }
  bool boolean(const std::string& key) const { return get<bool>(key, "a boolean"); }
  const std::string& string(const std::string& key) const { return get<std::string>(key, "a string"); }
  const std::vector<double>& list(const std::string& key) const { return get<std::vector<double>>(key, "a list"); }

  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

 private:
  template <typename T>
  const T& get(const std::string& key, const char* what) const {
    const Value& v = at(key).value;
    if (const auto* x = std::get_if<T>(&v)) return *x;
    throw ConfigError("parameter '" + key + "' is not " + what);
  }
  std::map<std::string, Param> map_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_integer(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec == std::errc{} && res.ptr == s.data() + s.size()) return v;
  // accept exact integers written as decimals, e.g. 1e5
  if (auto d = parse_real(s); d && std::floor(*d) == *d && std::abs(*d) < 9.0e15) return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

}  // namespace detail

/// Parses `text` as `type`; nullopt when it does not fit.
inline std::optional<Value> parse_value(std::string_view text, ValueType type) {
  text = detail::trim(text);
  switch (type) {
    case ValueType::integer:
      if (auto v = detail::parse_integer(text)) return Value{*v};
      return std::nullopt;
    case ValueType::real:
      if (auto v = detail::parse_real(text)) return Value{*v};
      return std::nullopt;
    case ValueType::boolean:
      if (text == "true") return Value{true};
      if (text == "false") return Value{false};
      return std::nullopt;
    case ValueType::string:
      if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
      if (text.empty()) return std::nullopt;
      return Value{std::string(text)};
    case ValueType::real_list: {
      std::vector<double> out;
      for (const auto& item : split_csv_line(text)) {
        auto v = detail::parse_real(item);
        if (!v) return std::nullopt;
        out.push_back(*v);
      }
      if (out.empty()) return std::nullopt;
      return Value{std::move(out)};
    }
  }
  return std::nullopt;
}

/// Returns an error message when a value breaks an invariant.
using ParamCheck = std::function<std::optional<std::string>(const Value&)>;

struct ParamSpec {
  std::string key;
  ValueType type;
  /// nullopt marks a required key.
  std::optional<std::string> default_text;
  std::string description;
  ParamCheck check;
  /// Allowed values for string parameters (empty = any).
  std::vector<std::string> choices;
};

struct ScenarioConfig;
using IssueList = std::vector<ConfigIssue>;

struct ScenarioSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
  std::vector<std::string> artifacts;
  std::vector<std::string> metrics;
  /// Checks spanning several keys; runs only when every key parsed cleanly.
  std::function<void(const ParamMap&, IssueList&, std::vector<std::string>& warnings)> cross_check;

  const ParamSpec* find(std::string_view key) const {
    for (const auto& p : params) {
      if (p.key == key) return &p;
    }
    return nullptr;
  }
};

inline constexpr const char* kDefaultOutputDir = "out";

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string output_dir = kDefaultOutputDir;
  ParamMap parameters;
  std::vector<std::string> warnings;
};

struct ParseResult {
  std::optional<ScenarioConfig> config;
  IssueList errors;

  bool ok() const noexcept { return config.has_value() && errors.empty(); }
  std::string error_report() const {
    std::string out;
    for (const auto& e : errors) out += e.to_string() + "\n";
    return out;
  }
};

/// Parses and validates a configuration against `catalogue`.
inline ParseResult parse_config(std::string_view text, const std::vector<ScenarioSpec>& catalogue) {
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line;
  };
  ParseResult result;
  auto& errors = result.errors;
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> section_lines;
  std::string section;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, section, "", "malformed section header"});
        continue;
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "scenario" && section != "parameters" && section != "output") {
        errors.push_back({line_no, section, "", "unknown section (expected scenario, parameters or output)"});
      } else if (section_lines.count(section)) {
        errors.push_back({line_no, section, "", "section repeated (first on line " +
                                                    std::to_string(section_lines[section]) + ")"});
      } else {
        section_lines[section] = line_no;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back({line_no, section, "", "expected 'key = value'"});
      continue;
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (section.empty()) {
      errors.push_back({line_no, "", key, "key outside of any section"});
      continue;
    }
    if (key.empty()) {
      errors.push_back({line_no, section, "", "empty key"});
      continue;
    }
    bool duplicate = false;
    for (const auto& e : entries) {
      if (e.section == section && e.key == key) {
        errors.push_back({line_no, section, key, "conflicting keys: already set on line " + std::to_string(e.line)});
        duplicate = true;
        break;
      }
    }
    if (!duplicate) entries.push_back({section, key, value, line_no});
  }

  auto find = [&](const std::string& sec, const std::string& key) -> const Entry* {
    for (const auto& e : entries) {
      if (e.section == sec && e.key == key) return &e;
    }
    return nullptr;
  };
  auto header_line = [&](const std::string& sec) -> std::size_t {
    auto it = section_lines.find(sec);
    return it == section_lines.end() ? 0 : it->second;
  };

  ScenarioConfig cfg;

  // [scenario]
  const ScenarioSpec* spec = nullptr;
  for (const auto& e : entries) {
    if (e.section == "scenario" && e.key != "name" && e.key != "seed") {
      errors.push_back({e.line, e.section, e.key, "unknown key (expected name or seed)"});
    }
    if (e.section == "output" && e.key != "dir") {
      errors.push_back({e.line, e.section, e.key, "unknown key (expected dir)"});
    }
  }
  if (const Entry* name = find("scenario", "name")) {
    for (const auto& s : catalogue) {
      if (s.name == name->value) spec = &s;
    }
    if (!spec) {
      std::string names;
      for (const auto& s : catalogue) names += (names.empty() ? "" : ", ") + s.name;
      errors.push_back({name->line, "scenario", "name", "unknown scenario '" + name->value + "' (expected one of " +
                                                          names + ")"});
    } else {
      cfg.scenario = spec->name;
    }
  } else {
    errors.push_back({header_line("scenario"), "scenario", "name", "missing required key in section [scenario]"});
  }
  if (const Entry* seed = find("scenario", "seed")) {
    std::uint64_t v = 0;
    const auto& s = seed->value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      errors.push_back({seed->line, "scenario", "seed", "unparsable value '" + s + "' (expected a 64-bit unsigned integer)"});
    } else {
      cfg.seed = v;
    }
  } else {
    errors.push_back({header_line("scenario"), "scenario", "seed", "missing required key in section [scenario]"});
  }

  // [output]
  if (const Entry* dir = find("output", "dir")) {
    auto v = parse_value(dir->value, ValueType::string);
    if (!v) errors.push_back({dir->line, "output", "dir", "unparsable value (expected a path)"});
    else cfg.output_dir = std::get<std::string>(*v);
  }

  // [parameters]
  if (spec) {
    for (const auto& e : entries) {
      if (e.section == "parameters" && !spec->find(e.key)) {
        errors.push_back({e.line, "parameters", e.key, "unknown key for scenario " + spec->name});
      }
    }
    bool params_ok = true;
    for (const auto& p : spec->params) {
      const Entry* e = find("parameters", p.key);
      Param param;
      if (e) {
        param.text = e->value;
        param.line = e->line;
      } else if (p.default_text) {
        param.text = *p.default_text;
        param.defaulted = true;
      } else {
        errors.push_back({header_line("parameters"), "parameters", p.key,
                          "missing required key in section [parameters]"});
        params_ok = false;
        continue;
      }
      auto value = parse_value(param.text, p.type);
      if (!value) {
        errors.push_back({param.line, "parameters", p.key,
                          "unparsable value '" + param.text + "' (expected " + to_string(p.type) + ")"});
        params_ok = false;
        continue;
      }
      if (!p.choices.empty()) {
        const auto& s = std::get<std::string>(*value);
        if (std::find(p.choices.begin(), p.choices.end(), s) == p.choices.end()) {
          std::string opts;
          for (const auto& c : p.choices) opts += (opts.empty() ? "" : ", ") + c;
          errors.push_back({param.line, "parameters", p.key, "invalid choice '" + s + "' (expected one of " + opts + ")"});
          params_ok = false;
          continue;
        }
      }
      if (p.check) {
        if (auto msg = p.check(*value)) {
          errors.push_back({param.line, "parameters", p.key, *msg});
          params_ok = false;
          continue;
        }
      }
      param.value = std::move(*value);
      cfg.parameters.set(p.key, std::move(param));
    }
    if (params_ok && spec->cross_check) spec->cross_check(cfg.parameters, errors, cfg.warnings);
  }

  std::stable_sort(errors.begin(), errors.end(),
                   [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace stochspin::experiment
