#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "solsent/error.hpp"

namespace solsent {

// ---------------------------------------------------------------------------
// strings

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

/// Splits on runs of ASCII whitespace; no empty tokens.
inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_ascii_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out += sep;
    out += p;
    first = false;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Fixed-precision decimal rendering used by every CSV and plot label,
/// so that plot text and table cells agree character for character.
inline std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    // avoid "-0.000" for tiny negatives
    if (s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  }
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Phrase list file: one phrase per line, `#` starts a comment line,
/// blank lines ignored.
inline std::vector<std::string> load_phrase_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open phrase list: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  if (out.empty()) throw InputError("phrase list is empty: " + path);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// A parsed CSV file with a mandatory header row. Quoted fields with
/// doubled quotes are supported; embedded newlines are not.
class CsvTable {
 public:
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> cells;
  };

  static CsvTable parse(std::string_view text, std::string source) {
    CsvTable t;
    t.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (trim(line).empty()) {
        if (eol == text.size()) break;
        continue;
      }
      auto cells = split_line(line, t.source_, line_no);
      if (!have_header) {
        for (auto& c : cells) c = std::string(trim(c));
        t.header_ = std::move(cells);
        have_header = true;
      } else {
        if (cells.size() != t.header_.size()) {
          throw InputError(t.source_ + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(t.header_.size()) + " fields, got " +
                           std::to_string(cells.size()));
        }
        t.rows_.push_back(Row{line_no, std::move(cells)});
      }
      if (eol == text.size()) break;
    }
    if (!have_header) throw InputError(t.source_ + ": missing header row");
    return t;
  }

  static CsvTable load(const std::string& path) { return parse(read_file(path), path); }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::string& source() const { return source_; }

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t column(std::string_view name) const {
    if (auto i = find_column(name)) return *i;
    throw InputError(source_ + ": missing column '" + std::string(name) + "'");
  }

  std::string where(const Row& r) const { return source_ + ":" + std::to_string(r.line); }

 private:
  static std::vector<std::string> split_line(std::string_view line, const std::string& src,
                                             std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (quoted) throw InputError(src + ":" + std::to_string(line_no) + ": unterminated quote");
    cells.push_back(std::move(cur));
    return cells;
  }

  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// dates and timestamps (UTC)

/// A UTC calendar day.
struct Date {
  std::chrono::sys_days day{};

  auto operator<=>(const Date&) const = default;

  static std::optional<Date> parse(std::string_view s) {
    s = trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto y = parse_int(s.substr(0, 4));
    auto m = parse_int(s.substr(5, 2));
    auto d = parse_int(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                    std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
  }

  std::string str() const {
    std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }
};

using Timestamp = std::chrono::sys_seconds;

inline Date utc_date(Timestamp t) { return Date{std::chrono::floor<std::chrono::days>(t)}; }

/// RFC 3339 date-time: `YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)`. A space is
/// accepted in place of `T`. Fractional seconds are truncated.
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  s = trim(s);
  if (s.size() < 20) return std::nullopt;
  auto date = Date::parse(s.substr(0, 10));
  if (!date) return std::nullopt;
  char sep = s[10];
  if (sep != 'T' && sep != 't' && sep != ' ') return std::nullopt;
  if (s[13] != ':' || s[16] != ':') return std::nullopt;
  auto hh = parse_int(s.substr(11, 2));
  auto mm = parse_int(s.substr(14, 2));
  auto ss = parse_int(s.substr(17, 2));
  if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
  std::size_t i = 19;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == start) return std::nullopt;
  }
  if (i >= s.size()) return std::nullopt;
  long long offset_min = 0;
  std::string_view tz = s.substr(i);
  if (tz == "Z" || tz == "z") {
    offset_min = 0;
  } else if (tz.size() == 6 && (tz[0] == '+' || tz[0] == '-') && tz[3] == ':') {
    auto oh = parse_int(tz.substr(1, 2));
    auto om = parse_int(tz.substr(4, 2));
    if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
    offset_min = *oh * 60 + *om;
    if (tz[0] == '-') offset_min = -offset_min;
  } else {
    return std::nullopt;
  }
  using namespace std::chrono;
  Timestamp t = time_point_cast<seconds>(date->day) + hours{*hh} + minutes{*mm} + seconds{*ss};
  return t - minutes{offset_min};
}

inline std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  auto rem = t - day;
  auto h = duration_cast<hours>(rem);
  auto m = duration_cast<minutes>(rem - h);
  auto sec = rem - h - m;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", Date{day}.str().c_str(),
                static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<int>(sec.count()));
  return buf;
}

/// Inclusive range of UTC calendar days.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }

  /// Parses `YYYY-MM-DD..YYYY-MM-DD`.
  static DateRange parse(std::string_view s) {
    auto dots = s.find("..");
    if (dots == std::string_view::npos) throw InputError("bad date range '" + std::string(s) + "'");
    auto a = Date::parse(s.substr(0, dots));
    auto b = Date::parse(s.substr(dots + 2));
    if (!a || !b) throw InputError("bad date range '" + std::string(s) + "'");
    return make(*a, *b);
  }

  static DateRange make(Date a, Date b) {
    if (b < a) throw InputError("date range ends before it starts: " + a.str() + ".." + b.str());
    return DateRange{a, b};
  }

  std::string str() const { return first.str() + ".." + last.str(); }
};

}  // namespace solsent
