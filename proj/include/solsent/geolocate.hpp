#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "solsent/error.hpp"
#include "solsent/ingest.hpp"
#include "solsent/util.hpp"

namespace solsent::geo {

/// U.S. Census Bureau regions.
enum class Region : std::uint8_t { northeast, midwest, south, west };

inline constexpr std::array<Region, 4> all_regions = {Region::northeast, Region::midwest,
                                                      Region::south, Region::west};

inline std::string_view region_name(Region r) {
  switch (r) {
    case Region::northeast: return "Northeast";
    case Region::midwest: return "Midwest";
    case Region::south: return "South";
    case Region::west: return "West";
  }
  return "?";
}

inline std::optional<Region> parse_region(std::string_view s) {
  auto l = to_lower_ascii(trim(s));
  if (l == "northeast") return Region::northeast;
  if (l == "midwest") return Region::midwest;
  if (l == "south") return Region::south;
  if (l == "west") return Region::west;
  return std::nullopt;
}

namespace detail {

struct StateInfo {
  std::string_view code;
  std::string_view name;
  Region region;
};

// Sorted by code; the index into this table is the StateCode value.
inline constexpr std::array<StateInfo, 51> kStates = {{
    {"AK", "Alaska", Region::west},         {"AL", "Alabama", Region::south},
    {"AR", "Arkansas", Region::south},      {"AZ", "Arizona", Region::west},
    {"CA", "California", Region::west},     {"CO", "Colorado", Region::west},
    {"CT", "Connecticut", Region::northeast}, {"DC", "District of Columbia", Region::south},
    {"DE", "Delaware", Region::south},      {"FL", "Florida", Region::south},
    {"GA", "Georgia", Region::south},       {"HI", "Hawaii", Region::west},
    {"IA", "Iowa", Region::midwest},        {"ID", "Idaho", Region::west},
    {"IL", "Illinois", Region::midwest},    {"IN", "Indiana", Region::midwest},
    {"KS", "Kansas", Region::midwest},      {"KY", "Kentucky", Region::south},
    {"LA", "Louisiana", Region::south},     {"MA", "Massachusetts", Region::northeast},
    {"MD", "Maryland", Region::south},      {"ME", "Maine", Region::northeast},
    {"MI", "Michigan", Region::midwest},    {"MN", "Minnesota", Region::midwest},
    {"MO", "Missouri", Region::midwest},    {"MS", "Mississippi", Region::south},
    {"MT", "Montana", Region::west},        {"NC", "North Carolina", Region::south},
    {"ND", "North Dakota", Region::midwest}, {"NE", "Nebraska", Region::midwest},
    {"NH", "New Hampshire", Region::northeast}, {"NJ", "New Jersey", Region::northeast},
    {"NM", "New Mexico", Region::west},     {"NV", "Nevada", Region::west},
    {"NY", "New York", Region::northeast},  {"OH", "Ohio", Region::midwest},
    {"OK", "Oklahoma", Region::south},      {"OR", "Oregon", Region::west},
    {"PA", "Pennsylvania", Region::northeast}, {"RI", "Rhode Island", Region::northeast},
    {"SC", "South Carolina", Region::south}, {"SD", "South Dakota", Region::midwest},
    {"TN", "Tennessee", Region::south},     {"TX", "Texas", Region::south},
    {"UT", "Utah", Region::west},           {"VA", "Virginia", Region::south},
    {"VT", "Vermont", Region::northeast},   {"WA", "Washington", Region::west},
    {"WI", "Wisconsin", Region::midwest},   {"WV", "West Virginia", Region::south},
    {"WY", "Wyoming", Region::west},
}};

}  // namespace detail

/// One of the 51 U.S. jurisdictions (50 states + DC).
class StateCode {
 public:
  static constexpr std::size_t count = 51;

  StateCode() = default;

  static std::optional<StateCode> parse(std::string_view code) {
    auto up = to_upper_ascii(trim(code));
    for (std::size_t i = 0; i < count; ++i) {
      if (detail::kStates[i].code == up) return StateCode(static_cast<std::uint8_t>(i));
    }
    return std::nullopt;
  }

  static StateCode from_index(std::size_t i) { return StateCode(static_cast<std::uint8_t>(i)); }

  static std::vector<StateCode> all() {
    std::vector<StateCode> v;
    for (std::size_t i = 0; i < count; ++i) v.push_back(from_index(i));
    return v;
  }

  std::size_t index() const { return index_; }
  std::string_view code() const { return detail::kStates[index_].code; }
  std::string_view name() const { return detail::kStates[index_].name; }
  Region region() const { return detail::kStates[index_].region; }

  auto operator<=>(const StateCode&) const = default;

 private:
  explicit StateCode(std::uint8_t i) : index_(i) {}
  std::uint8_t index_ = 0;
};

struct Box {
  double lat_min = 0, lat_max = 0, lon_min = 0, lon_max = 0;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
  bool intersects(const Box& o) const {
    return lat_min <= o.lat_max && o.lat_min <= lat_max && lon_min <= o.lon_max &&
           o.lon_min <= lon_max;
  }
  Box merged(const Box& o) const {
    return {std::min(lat_min, o.lat_min), std::max(lat_max, o.lat_max),
            std::min(lon_min, o.lon_min), std::max(lon_max, o.lon_max)};
  }
};

/// Coarse extent that every state box must lie within (covers Alaska and
/// Hawaii; Aleutian islands east of the antimeridian are not modeled).
inline constexpr Box kUsBounds{18.0, 72.0, -180.0, -66.0};

enum class Method { coordinates, profile_exact, profile_city, none };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::coordinates: return "coordinates";
    case Method::profile_exact: return "profile_exact";
    case Method::profile_city: return "profile_city";
    case Method::none: return "none";
  }
  return "?";
}

struct GeoResolution {
  enum class Kind { state, non_us, unknown };

  std::string post_id;
  Kind kind = Kind::unknown;
  std::optional<StateCode> state;
  Method method = Method::none;

  static GeoResolution of_state(StateCode s, Method m) { return {{}, Kind::state, s, m}; }
  static GeoResolution non_us() { return {{}, Kind::non_us, std::nullopt, Method::none}; }
  static GeoResolution unknown() { return {{}, Kind::unknown, std::nullopt, Method::none}; }

  bool resolved() const { return kind == Kind::state; }

  std::string outcome_str() const {
    switch (kind) {
      case Kind::state: return std::string(state->code());
      case Kind::non_us: return "non_us";
      case Kind::unknown: return "unknown";
    }
    return "unknown";
  }
};

/// Key form used for every name lookup: case-folded, periods dropped,
/// whitespace collapsed.
inline std::string name_key(std::string_view s) {
  std::string c = ingest::canonical_text(s);
  std::string out;
  out.reserve(c.size());
  for (char ch : c) {
    if (ch != '.') out += ch;
  }
  return std::string(trim(out));
}

inline const std::vector<std::string>& builtin_foreign_tokens() {
  static const std::vector<std::string> t = {
      "canada", "mexico", "uk", "united kingdom", "great britain", "england", "scotland",
      "wales", "ireland", "northern ireland", "france", "germany", "deutschland", "spain",
      "italy", "portugal", "netherlands", "belgium", "switzerland", "austria", "sweden",
      "norway", "denmark", "finland", "poland", "greece", "turkey", "russia", "ukraine",
      "india", "pakistan", "bangladesh", "sri lanka", "china", "japan", "south korea",
      "korea", "taiwan", "hong kong", "singapore", "malaysia", "indonesia", "philippines",
      "thailand", "vietnam", "australia", "new zealand", "nigeria", "kenya", "ghana",
      "south africa", "egypt", "morocco", "uae", "united arab emirates", "dubai",
      "saudi arabia", "qatar", "israel", "brazil", "argentina", "chile", "colombia", "peru",
      "venezuela", "ecuador", "jamaica",
      "toronto", "vancouver", "montreal", "montréal", "calgary", "ottawa", "edmonton",
      "winnipeg", "ontario", "quebec", "québec", "british columbia", "alberta", "london",
      "manchester", "birmingham uk", "glasgow", "edinburgh", "dublin", "paris", "berlin",
      "munich", "madrid", "barcelona", "rome", "milan", "amsterdam", "brussels", "zurich",
      "geneva", "vienna", "stockholm", "oslo", "copenhagen", "helsinki", "warsaw", "athens",
      "istanbul", "moscow", "kyiv", "mumbai", "delhi", "new delhi", "bangalore", "bengaluru",
      "chennai", "kolkata", "hyderabad", "pune", "karachi", "lahore", "beijing", "shanghai",
      "tokyo", "osaka", "seoul", "manila", "jakarta", "bangkok", "sydney", "melbourne",
      "brisbane", "perth", "auckland", "lagos", "abuja", "nairobi", "accra", "johannesburg",
      "cape town", "cairo", "abu dhabi", "riyadh", "doha", "tel aviv", "sao paulo",
      "são paulo", "rio de janeiro", "buenos aires", "santiago", "bogota", "bogotá", "lima",
      "mexico city", "ciudad de méxico", "guadalajara", "monterrey"};
  return t;
}

/// Place-name and coordinate tables used by resolve(). Immutable after
/// load.
class Gazetteer {
 public:
  struct StateRow {
    StateCode code;
    std::string name;
    Region region;
    Box box;
    double centroid_lat = 0;
    double centroid_lon = 0;
  };

  struct CityEntry {
    StateCode state;
    long long rank;
  };

  /// Builds and validates from parsed tables. `states` must carry the
  /// `states.csv` columns, `cities` and `aliases` theirs.
  static Gazetteer from_tables(const CsvTable& states, const CsvTable* cities,
                               const CsvTable* aliases) {
    Gazetteer g;
    std::array<std::optional<StateRow>, StateCode::count> rows;

    const auto c_code = states.column("code");
    const auto c_name = states.column("name");
    const auto c_region = states.column("region");
    const auto c_lat_min = states.column("lat_min");
    const auto c_lat_max = states.column("lat_max");
    const auto c_lon_min = states.column("lon_min");
    const auto c_lon_max = states.column("lon_max");
    const auto c_clat = states.column("centroid_lat");
    const auto c_clon = states.column("centroid_lon");

    for (const auto& r : states.rows()) {
      const auto where = states.where(r);
      auto code = StateCode::parse(r.cells[c_code]);
      if (!code) throw InputError(where + ": unknown state code '" + r.cells[c_code] + "'");
      if (rows[code->index()]) throw InputError(where + ": duplicate state " + std::string(code->code()));
      auto region = parse_region(r.cells[c_region]);
      if (!region) throw InputError(where + ": bad region '" + r.cells[c_region] + "'");
      if (*region != code->region()) {
        throw InputError(where + ": " + std::string(code->code()) + " is in the " +
                         std::string(region_name(code->region())) + " census region, not " +
                         r.cells[c_region]);
      }
      auto num = [&](std::size_t c, const char* field) {
        auto v = parse_double(r.cells[c]);
        if (!v) throw InputError(where + ": " + std::string(code->code()) + ": bad " + field);
        return *v;
      };
      StateRow row{*code, std::string(trim(r.cells[c_name])), *region,
                   Box{num(c_lat_min, "lat_min"), num(c_lat_max, "lat_max"),
                       num(c_lon_min, "lon_min"), num(c_lon_max, "lon_max")},
                   num(c_clat, "centroid_lat"), num(c_clon, "centroid_lon")};
      if (row.box.lat_min > row.box.lat_max) {
        throw InputError(where + ": " + std::string(code->code()) + ": lat_min > lat_max");
      }
      if (row.box.lon_min > row.box.lon_max) {
        throw InputError(where + ": " + std::string(code->code()) + ": lon_min > lon_max");
      }
      if (!kUsBounds.contains(row.box.lat_min, row.box.lon_min) ||
          !kUsBounds.contains(row.box.lat_max, row.box.lon_max)) {
        throw InputError(where + ": " + std::string(code->code()) + ": box outside U.S. extent");
      }
      if (!row.box.contains(row.centroid_lat, row.centroid_lon)) {
        throw InputError(where + ": " + std::string(code->code()) + ": centroid outside its box");
      }
      if (row.name.empty()) throw InputError(where + ": " + std::string(code->code()) + ": empty name");
      rows[code->index()] = std::move(row);
    }
    for (std::size_t i = 0; i < StateCode::count; ++i) {
      if (!rows[i]) {
        throw InputError(states.source() + ": missing state " +
                         std::string(StateCode::from_index(i).code()));
      }
      g.states_.push_back(std::move(*rows[i]));
    }

    for (const auto& s : g.states_) {
      g.add_name(name_key(s.name), s.code, states.source());
    }
    if (aliases) {
      const auto c_alias = aliases->column("alias");
      const auto c_state = aliases->column("state_code");
      for (const auto& r : aliases->rows()) {
        auto key = name_key(r.cells[c_alias]);
        if (key.empty()) throw InputError(aliases->where(r) + ": empty alias");
        if (to_upper_ascii(trim(r.cells[c_state])) == "NON_US") {
          g.foreign_.insert(key);
          continue;
        }
        auto code = StateCode::parse(r.cells[c_state]);
        if (!code) throw InputError(aliases->where(r) + ": unknown state code '" + r.cells[c_state] + "'");
        g.add_name(key, *code, aliases->where(r));
      }
    }
    if (cities) {
      const auto c_city = cities->column("city");
      const auto c_state = cities->column("state_code");
      const auto c_rank = cities->column("rank");
      for (const auto& r : cities->rows()) {
        auto key = name_key(r.cells[c_city]);
        auto code = StateCode::parse(r.cells[c_state]);
        auto rank = parse_int(r.cells[c_rank]);
        if (key.empty()) throw InputError(cities->where(r) + ": empty city");
        if (!code) throw InputError(cities->where(r) + ": unknown state code '" + r.cells[c_state] + "'");
        if (!rank || *rank < 1) throw InputError(cities->where(r) + ": rank must be a positive integer");
        g.cities_[key].push_back(CityEntry{*code, *rank});
      }
      for (auto& [k, v] : g.cities_) {
        std::sort(v.begin(), v.end(), [](const CityEntry& a, const CityEntry& b) {
          return a.rank != b.rank ? a.rank < b.rank : a.state < b.state;
        });
      }
    }
    for (const auto& t : builtin_foreign_tokens()) g.foreign_.insert(name_key(t));
    g.build_extents();
    return g;
  }

  /// Loads `states.csv`, `cities.csv` and `aliases.csv` from a directory.
  /// The last two are optional.
  static Gazetteer load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("gazetteer directory not found: " + dir.string());
    auto states = CsvTable::load((dir / "states.csv").string());
    std::optional<CsvTable> cities, aliases;
    if (std::filesystem::exists(dir / "cities.csv")) cities = CsvTable::load((dir / "cities.csv").string());
    if (std::filesystem::exists(dir / "aliases.csv")) aliases = CsvTable::load((dir / "aliases.csv").string());
    return from_tables(states, cities ? &*cities : nullptr, aliases ? &*aliases : nullptr);
  }

  const std::vector<StateRow>& states() const { return states_; }
  const StateRow& state(StateCode c) const { return states_[c.index()]; }
  const std::vector<Box>& extents() const { return extents_; }

  std::optional<StateCode> lookup_name(const std::string& key) const {
    auto it = names_.find(key);
    if (it == names_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<StateCode> lookup_city(const std::string& key) const {
    auto it = cities_.find(key);
    if (it == cities_.end()) return std::nullopt;
    return it->second.front().state;
  }

  bool is_foreign(const std::string& key) const { return foreign_.count(key) > 0; }

  const std::map<std::string, StateCode>& names() const { return names_; }
  const std::unordered_set<std::string>& foreign_tokens() const { return foreign_; }

 private:
  void add_name(const std::string& key, StateCode code, const std::string& where) {
    auto [it, inserted] = names_.emplace(key, code);
    if (!inserted && it->second != code) {
      throw InputError(where + ": name '" + key + "' maps to both " + std::string(it->second.code()) +
                       " and " + std::string(code.code()));
    }
  }

  // Connected components of overlapping/touching state boxes, each
  // collapsed to its bounding box: the contiguous states, Alaska, Hawaii.
  void build_extents() {
    std::vector<std::size_t> parent(states_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t i = 0; i < states_.size(); ++i) {
      for (std::size_t j = i + 1; j < states_.size(); ++j) {
        if (states_[i].box.intersects(states_[j].box)) parent[find(i)] = find(j);
      }
    }
    std::map<std::size_t, Box> comp;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      auto r = find(i);
      auto it = comp.find(r);
      if (it == comp.end()) comp.emplace(r, states_[i].box);
      else it->second = it->second.merged(states_[i].box);
    }
    for (auto& [r, b] : comp) extents_.push_back(b);
  }

  std::vector<StateRow> states_;
  std::map<std::string, StateCode> names_;
  std::unordered_map<std::string, std::vector<CityEntry>> cities_;
  std::unordered_set<std::string> foreign_;
  std::vector<Box> extents_;
};

inline Gazetteer load_gazetteer(const std::filesystem::path& dir) { return Gazetteer::load(dir); }

/// Two-letter codes that are also common English words; they only count
/// after a comma.
inline bool is_ambiguous_code(std::string_view code) {
  static constexpr std::string_view amb[] = {"IN", "OR", "ME", "OK", "HI", "DE"};
  for (auto a : amb) {
    if (a == code) return true;
  }
  return false;
}

inline double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double r = 6371.0088;
  constexpr double rad = 3.14159265358979323846 / 180.0;
  double dlat = (lat2 - lat1) * rad;
  double dlon = (lon2 - lon1) * rad;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * r * std::asin(std::min(1.0, std::sqrt(a)));
}

inline GeoResolution resolve_coordinates(double lat, double lon, const Gazetteer& gaz) {
  std::optional<StateCode> best;
  double best_d = 0;
  for (const auto& s : gaz.states()) {
    if (!s.box.contains(lat, lon)) continue;
    double d = great_circle_km(lat, lon, s.centroid_lat, s.centroid_lon);
    if (!best || d < best_d) {
      best = s.code;
      best_d = d;
    }
  }
  if (best) return GeoResolution::of_state(*best, Method::coordinates);
  for (const auto& e : gaz.extents()) {
    if (e.contains(lat, lon)) return GeoResolution::unknown();
  }
  return GeoResolution::non_us();
}

namespace detail {

inline bool is_country_us(const std::string& key) {
  return key == "usa" || key == "us" || key == "united states" || key == "united states of america" ||
         key == "america" || key == "u s a" || key == "u s";
}

// Whole-word phrase occurrences of `phrase` in `hay` (both name keys).
inline std::vector<std::size_t> find_words(const std::string& hay, const std::string& phrase) {
  std::vector<std::size_t> hits;
  auto is_letter = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || static_cast<unsigned char>(c) >= 0x80;
  };
  std::size_t pos = 0;
  while ((pos = hay.find(phrase, pos)) != std::string::npos) {
    bool left = pos == 0 || !is_letter(hay[pos - 1]);
    std::size_t end = pos + phrase.size();
    bool right = end == hay.size() || !is_letter(hay[end]);
    if (left && right) hits.push_back(pos);
    ++pos;
  }
  return hits;
}

// Upper-case two-letter state codes standing alone in `raw`. Codes that
// double as English words count only when a comma sits next to them.
inline std::vector<StateCode> code_tokens(const std::string& raw) {
  std::vector<StateCode> out;
  std::string cur;
  for (std::size_t i = 0; i <= raw.size(); ++i) {
    char ch = i < raw.size() ? raw[i] : ' ';
    bool alpha = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z');
    if (alpha) {
      cur += ch;
      continue;
    }
    if (cur.size() == 2 && cur == to_upper_ascii(cur)) {
      if (auto code = StateCode::parse(cur)) {
        std::size_t l = i - 2;
        while (l > 0 && raw[l - 1] == ' ') --l;
        std::size_t r = i;
        while (r < raw.size() && raw[r] == ' ') ++r;
        bool comma_adjacent = (l > 0 && raw[l - 1] == ',') || (r < raw.size() && raw[r] == ',');
        if (!is_ambiguous_code(cur) || comma_adjacent) out.push_back(*code);
      }
    }
    cur.clear();
  }
  return out;
}

}  // namespace detail

/// Resolves a free-text profile location.
inline GeoResolution resolve_profile(std::string_view location, const Gazetteer& gaz) {
  std::string_view raw = trim(location);
  if (raw.empty()) return GeoResolution::unknown();

  std::vector<std::string> parts;
  std::vector<std::string> raw_parts;
  for (auto& p : split(raw, ',')) {
    auto t = std::string(trim(p));
    if (t.empty()) continue;
    raw_parts.push_back(t);
    parts.push_back(name_key(t));
  }
  while (parts.size() > 1 && detail::is_country_us(parts.back())) {
    parts.pop_back();
    raw_parts.pop_back();
  }
  if (parts.empty()) return GeoResolution::unknown();
  if (parts.size() == 1 && detail::is_country_us(parts[0])) return GeoResolution::unknown();

  // (1) "City, ST" / "City, State"
  if (parts.size() >= 2) {
    const auto& last = parts.back();
    if (last.size() == 2) {
      if (auto c = StateCode::parse(last)) return GeoResolution::of_state(*c, Method::profile_exact);
    }
    if (auto c = gaz.lookup_name(last)) return GeoResolution::of_state(*c, Method::profile_exact);
    if (gaz.is_foreign(last)) return GeoResolution::non_us();
  }

  const std::string whole = join(parts, ", ");

  // (2) exact state name or alias, or an unambiguous code token
  if (auto c = gaz.lookup_name(whole)) return GeoResolution::of_state(*c, Method::profile_exact);
  {
    std::set<StateCode> found;
    for (const auto& p : parts) {
      if (auto c = gaz.lookup_name(p)) found.insert(*c);
    }
    for (auto c : detail::code_tokens(join(raw_parts, ","))) found.insert(c);
    if (found.size() == 1) return GeoResolution::of_state(*found.begin(), Method::profile_exact);
  }

  // (3) city table, most populous first
  if (auto c = gaz.lookup_city(whole)) return GeoResolution::of_state(*c, Method::profile_city);
  if (parts.size() >= 2) {
    if (auto c = gaz.lookup_city(parts.front())) return GeoResolution::of_state(*c, Method::profile_city);
  }

  // state name embedded in longer text ("somewhere in west texas")
  {
    std::vector<std::pair<std::string, StateCode>> names(gaz.names().begin(), gaz.names().end());
    std::sort(names.begin(), names.end(), [](const auto& a, const auto& b) {
      return a.first.size() != b.first.size() ? a.first.size() > b.first.size() : a.first < b.first;
    });
    std::vector<bool> used(whole.size(), false);
    std::set<StateCode> found;
    for (const auto& [key, code] : names) {
      if (key.size() < 4) continue;
      for (auto pos : detail::find_words(whole, key)) {
        bool overlap = false;
        for (std::size_t i = pos; i < pos + key.size(); ++i) overlap = overlap || used[i];
        if (overlap) continue;
        for (std::size_t i = pos; i < pos + key.size(); ++i) used[i] = true;
        found.insert(code);
      }
    }
    if (found.size() == 1) return GeoResolution::of_state(*found.begin(), Method::profile_exact);
  }

  // (4) foreign place
  for (const auto& p : parts) {
    if (gaz.is_foreign(p)) return GeoResolution::non_us();
  }
  for (const auto& f : gaz.foreign_tokens()) {
    if (f.size() >= 4 && !detail::find_words(whole, f).empty()) return GeoResolution::non_us();
  }
  return GeoResolution::unknown();
}

/// Coordinates take precedence; the profile string is consulted when they
/// are absent or do not land in a state.
inline GeoResolution resolve(const std::optional<std::string>& location,
                             const std::optional<ingest::GeoPoint>& coords, const Gazetteer& gaz) {
  std::optional<GeoResolution> from_coords;
  if (coords) {
    from_coords = resolve_coordinates(coords->lat, coords->lon, gaz);
    if (from_coords->resolved()) return *from_coords;
  }
  GeoResolution from_profile = location ? resolve_profile(*location, gaz) : GeoResolution::unknown();
  if (from_profile.resolved()) return from_profile;
  if (from_coords && from_coords->kind == GeoResolution::Kind::non_us) return *from_coords;
  return from_profile;
}

inline GeoResolution resolve_post(const ingest::RawPost& p, const Gazetteer& gaz) {
  auto r = resolve(p.user_location, p.coordinates, gaz);
  r.post_id = p.id;
  return r;
}

}  // namespace solsent::geo
