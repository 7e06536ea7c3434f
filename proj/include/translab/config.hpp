#ifndef TRANSLAB_CONFIG_HPP
#define TRANSLAB_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "translab/error.hpp"
#include "translab/geometry.hpp"

namespace translab {

/// Flat "key = value" text with [section] headers. Keys are addressed as
/// "section.key"; '#' and ';' at the start of a line begin comments.
class ConfigText {
 public:
  static ConfigText parse(std::istream& in, const std::string& source = "<config>") {
    ConfigText c;
    std::string line, section;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      const std::string where = source + ":" + std::to_string(number);
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      const std::string full = section + "." + key;
      if (c.values_.count(full)) throw ConfigError(full + ": defined twice (" + where + ")");
      c.values_[full] = strip_comment(trim(s.substr(eq + 1)));
    }
    return c;
  }

  static ConfigText load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  /// Applies "section.key=value".
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected section.key=value");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw ConfigError("override '" + assignment + "': key must be written as section.key");
    values_[key] = trim(assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& raw(const std::string& key) const { return values_.at(key); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  static std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
  }

 private:
  static std::string strip_comment(const std::string& v) {
    const auto k = v.find(" #");
    return k == std::string::npos ? v : trim(v.substr(0, k));
  }

  std::map<std::string, std::string> values_;
};

/// Typed, validated access to a ConfigText. Every key read is recorded, and
/// finish() rejects keys that nothing asked for, so typos surface as errors.
class ConfigReader {
 public:
  explicit ConfigReader(const ConfigText& text) : text_(text) {}

  double real(const std::string& key, double fallback) {
    const std::string* s = lookup(key);
    if (s) return parse_real(key, *s);
    record(key, format_real(fallback));
    return fallback;
  }

  double positive(const std::string& key, double fallback) {
    const double v = real(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive (got " + describe(key, v) + ")");
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = real(key, fallback);
    if (!(v >= 0.0)) fail(key, "must be non-negative (got " + describe(key, v) + ")");
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min_value) {
    const std::string* s = lookup(key);
    if (!s) return record(key, std::to_string(fallback)), fallback;
    std::int64_t v = 0;
    const auto r = std::from_chars(s->data(), s->data() + s->size(), v);
    if (r.ec != std::errc() || r.ptr != s->data() + s->size()) fail(key, "expected an integer, got '" + *s + "'");
    if (v < min_value) fail(key, "must be at least " + std::to_string(min_value));
    record(key, std::to_string(v));
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const std::string* s = lookup(key);
    if (!s) return record(key, std::to_string(fallback)), fallback;
    std::uint64_t v = 0;
    const auto r = std::from_chars(s->data(), s->data() + s->size(), v);
    if (r.ec != std::errc() || r.ptr != s->data() + s->size())
      fail(key, "expected a non-negative integer, got '" + *s + "'");
    record(key, std::to_string(v));
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    const std::string* s = lookup(key);
    if (!s) return record(key, fallback ? "true" : "false"), fallback;
    if (*s == "true" || *s == "yes" || *s == "1") return record(key, "true"), true;
    if (*s == "false" || *s == "no" || *s == "0") return record(key, "false"), false;
    fail(key, "expected true or false, got '" + *s + "'");
    return fallback;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const std::string* s = lookup(key);
    const std::string v = s ? *s : fallback;
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "must be one of {" + list + "}, got '" + v + "'");
    }
    record(key, v);
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string* s = lookup(key);
    const std::string v = s ? *s : fallback;
    record(key, v);
    return v;
  }

  /// Comma- or space-separated reals; "inf" is accepted.
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
    const std::string* s = lookup(key);
    if (!s) {
      record(key, join(fallback));
      return fallback;
    }
    std::vector<double> out;
    for (const auto& tok : split(*s, ", \t")) out.push_back(parse_real(key, tok, false));
    if (out.empty()) fail(key, "list must not be empty");
    record(key, join(out));
    return out;
  }

  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback, int min_value) {
    const std::vector<double> v = reals(key, std::vector<double>(fallback.begin(), fallback.end()));
    std::vector<int> out;
    for (double d : v) {
      if (d != std::floor(d) || std::isinf(d)) fail(key, "entries must be integers");
      if (d < min_value) fail(key, "entries must be at least " + std::to_string(min_value));
      out.push_back(static_cast<int>(d));
    }
    return out;
  }

  /// "x y; x y; ..." point list.
  std::vector<Point> points(const std::string& key, const std::vector<Point>& fallback) {
    const std::string* s = lookup(key);
    if (!s) {
      record(key, join_points(fallback));
      return fallback;
    }
    std::vector<Point> out;
    for (const auto& item : split(*s, ";")) {
      const auto xy = split(item, ", \t");
      if (xy.size() != 2) fail(key, "each point needs two coordinates, got '" + ConfigText::trim(item) + "'");
      out.push_back({parse_real(key, xy[0], false), parse_real(key, xy[1], false)});
    }
    if (out.empty()) fail(key, "list must not be empty");
    record(key, join_points(out));
    return out;
  }

  /// Throws for every key present in the text that no reader asked for.
  void finish() const {
    for (const auto& [k, v] : text_.entries())
      if (!seen_.count(k)) throw ConfigError(k + ": unknown key");
  }

  /// Effective values (given or defaulted) of every key that was read.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

  [[noreturn]] static void fail(const std::string& key, const std::string& message) {
    throw ConfigError(key + ": " + message);
  }

 private:
  const std::string* lookup(const std::string& key) {
    seen_[key] = true;
    return text_.has(key) ? &text_.raw(key) : nullptr;
  }

  double parse_real(const std::string& key, const std::string& s, bool keep = true) {
    double v = 0.0;
    if (s == "inf" || s == "+inf") v = std::numeric_limits<double>::infinity();
    else {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected a number, got '" + s + "'");
    }
    if (std::isnan(v)) fail(key, "expected a number, got '" + s + "'");
    if (keep) record(key, format_real(v));
    return v;
  }

  static std::string describe(const std::string&, double v) { return format_real(v); }

  static std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }

  static std::string join(const std::vector<double>& v) {
    std::string s;
    for (double d : v) s += (s.empty() ? "" : ", ") + format_real(d);
    return s;
  }

  static std::string join_points(const std::vector<Point>& v) {
    std::string s;
    for (const Point& p : v) s += (s.empty() ? "" : "; ") + format_real(p.x) + " " + format_real(p.y);
    return s;
  }

  static std::vector<std::string> split(const std::string& s, std::string_view seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (seps.find(c) != std::string_view::npos) {
        if (!ConfigText::trim(cur).empty()) out.push_back(ConfigText::trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!ConfigText::trim(cur).empty()) out.push_back(ConfigText::trim(cur));
    return out;
  }

  void record(const std::string& key, const std::string& value) { resolved_[key] = value; }

  const ConfigText& text_;
  std::map<std::string, bool> seen_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace translab

#endif  // TRANSLAB_CONFIG_HPP
