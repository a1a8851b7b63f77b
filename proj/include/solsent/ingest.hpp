#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <nlohmann/json.hpp>

#include "solsent/error.hpp"
#include "solsent/util.hpp"

namespace solsent::ingest {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// One ingested social-media record.
struct RawPost {
  std::string id;
  std::string text;
  std::optional<std::string> quoted_text;
  std::optional<std::string> extended_text;
  std::string screen_name;
  std::string user_description;
  std::optional<std::string> user_location;
  std::optional<GeoPoint> coordinates;
  Timestamp created_at{};
  bool is_retweet = false;
};

struct Reject {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<RawPost> posts;
  std::vector<Reject> rejects;
};

/// Counts for the relevance filter chain. Each dropped record is charged
/// to exactly one stage.
struct FilterReport {
  std::size_t n_input = 0;
  std::size_t n_keyword_matched = 0;
  std::size_t n_excluded_irrelevant = 0;
  std::size_t n_excluded_profile_only = 0;
  std::size_t n_deduped = 0;
  std::size_t n_retained = 0;

  bool reconciles() const {
    return n_keyword_matched <= n_input &&
           n_retained + n_excluded_irrelevant + n_excluded_profile_only + n_deduped ==
               n_keyword_matched;
  }
};

inline const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> k = {
      "solar energy",  "solar panel",  "solar PV",      "solar photovoltaic", "solar battery",
      "solar thermal", "solar power",  "solar-powered", "solar generation",   "solar subsidies"};
  return k;
}

inline const std::vector<std::string>& default_stopphrases() {
  static const std::vector<std::string> s = {"Pokemon",       "Superman",
                                             "galaxy",        "eclipse",
                                             "solar plexus",  "solar-powered human",
                                             "I will become your sun"};
  return s;
}

// ---------------------------------------------------------------------------
// record parsing

namespace detail {

inline std::optional<std::string> opt_string(const nlohmann::json& j, const char* key,
                                             std::string& err) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    err = std::string("field '") + key + "' is not a string";
    return std::nullopt;
  }
  return it->get<std::string>();
}

}  // namespace detail

/// Parses one JSON object into a RawPost, or returns the reason it is
/// malformed.
inline std::variant<RawPost, std::string> parse_post(const nlohmann::json& j) {
  using detail::opt_string;
  if (!j.is_object()) return std::string("record is not a JSON object");
  RawPost p;
  std::string err;

  auto id = j.find("id");
  if (id == j.end()) return std::string("missing 'id'");
  if (id->is_string()) {
    p.id = id->get<std::string>();
  } else if (id->is_number_integer() || id->is_number_unsigned()) {
    p.id = id->dump();
  } else {
    return std::string("field 'id' is not a string");
  }
  if (trim(p.id).empty()) return std::string("empty 'id'");

  auto text = opt_string(j, "text", err);
  if (!err.empty()) return err;
  if (!text || trim(*text).empty()) return std::string("missing or empty 'text'");
  p.text = std::move(*text);

  p.quoted_text = opt_string(j, "quoted_text", err);
  if (!err.empty()) return err;
  p.extended_text = opt_string(j, "extended_text", err);
  if (!err.empty()) return err;
  p.screen_name = opt_string(j, "screen_name", err).value_or("");
  if (!err.empty()) return err;
  p.user_description = opt_string(j, "user_description", err).value_or("");
  if (!err.empty()) return err;
  p.user_location = opt_string(j, "user_location", err);
  if (!err.empty()) return err;

  auto lat = j.find("lat");
  auto lon = j.find("lon");
  bool has_lat = lat != j.end() && !lat->is_null();
  bool has_lon = lon != j.end() && !lon->is_null();
  if (has_lat != has_lon) return std::string("'lat' and 'lon' must be given together");
  if (has_lat) {
    if (!lat->is_number() || !lon->is_number()) return std::string("'lat'/'lon' not numeric");
    double la = lat->get<double>();
    double lo = lon->get<double>();
    if (!(la >= -90.0 && la <= 90.0)) return std::string("'lat' out of range");
    if (!(lo >= -180.0 && lo <= 180.0)) return std::string("'lon' out of range");
    p.coordinates = GeoPoint{la, lo};
  }

  auto created = opt_string(j, "created_at", err);
  if (!err.empty()) return err;
  if (!created) return std::string("missing 'created_at'");
  auto ts = parse_rfc3339(*created);
  if (!ts) return std::string("'created_at' is not RFC 3339: ") + *created;
  p.created_at = *ts;

  auto rt = j.find("is_retweet");
  if (rt != j.end() && !rt->is_null()) {
    if (!rt->is_boolean()) return std::string("'is_retweet' is not a boolean");
    p.is_retweet = rt->get<bool>();
  }
  return p;
}

/// Reads JSONL. Malformed lines are recorded in `rejects` and skipped;
/// loading never aborts on bad records.
inline LoadResult load_jsonl(std::istream& in) {
  LoadResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      out.rejects.push_back({line_no, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    auto parsed = parse_post(j);
    if (auto* reason = std::get_if<std::string>(&parsed)) {
      out.rejects.push_back({line_no, *reason});
    } else {
      out.posts.push_back(std::move(std::get<RawPost>(parsed)));
    }
  }
  return out;
}

inline LoadResult load_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus: " + path);
  return load_jsonl(in);
}

inline nlohmann::json to_json(const RawPost& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["text"] = p.text;
  if (p.quoted_text) j["quoted_text"] = *p.quoted_text;
  if (p.extended_text) j["extended_text"] = *p.extended_text;
  j["screen_name"] = p.screen_name;
  j["user_description"] = p.user_description;
  if (p.user_location) j["user_location"] = *p.user_location;
  if (p.coordinates) {
    j["lat"] = p.coordinates->lat;
    j["lon"] = p.coordinates->lon;
  }
  j["created_at"] = format_rfc3339(p.created_at);
  j["is_retweet"] = p.is_retweet;
  return j;
}

// ---------------------------------------------------------------------------
// phrase matching

/// NFC-normalized, case-folded text with every run of Unicode whitespace
/// collapsed to one ASCII space and no leading/trailing whitespace.
inline std::string canonical_text(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw StageError("ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString n = nfc->normalize(u, status);
  n.foldCase();
  n = nfc->normalize(n, status);
  if (U_FAILURE(status)) throw StageError("NFC normalization failed");

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < n.length();) {
    UChar32 c = n.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(' '));
    pending_space = false;
    collapsed.append(c);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

/// Case-insensitive contiguous-substring matcher over canonical text. A
/// hyphen inside a phrase also matches a space ("solar-powered" matches
/// "solar powered").
class PhraseMatcher {
 public:
  PhraseMatcher() = default;

  explicit PhraseMatcher(const std::vector<std::string>& phrases) {
    for (const auto& raw : phrases) {
      std::string p = canonical_text(raw);
      if (p.empty()) continue;
      expand_hyphens(p, 0);
      squashed_.push_back(squash(p));
    }
    std::sort(variants_.begin(), variants_.end());
    variants_.erase(std::unique(variants_.begin(), variants_.end()), variants_.end());
  }

  /// Drops spaces, hyphens, underscores and periods: the separators a
  /// handle like "SolarPanelPro" or "solar_power_co" cannot carry.
  static std::string squash(std::string_view canonical) {
    std::string out;
    for (char c : canonical) {
      if (c != ' ' && c != '-' && c != '_' && c != '.') out += c;
    }
    return out;
  }

  bool empty() const { return variants_.empty(); }

  /// `canonical` must come from canonical_text().
  bool matches(std::string_view canonical) const {
    for (const auto& v : variants_) {
      if (canonical.find(v) != std::string_view::npos) return true;
    }
    return false;
  }

  /// `handle` must be squash(canonical_text(screen_name)).
  bool matches_handle(std::string_view handle) const {
    for (const auto& v : squashed_) {
      if (!v.empty() && handle.find(v) != std::string_view::npos) return true;
    }
    return false;
  }

  const std::vector<std::string>& variants() const { return variants_; }

 private:
  void expand_hyphens(std::string& p, std::size_t from) {
    auto h = p.find('-', from);
    if (h == std::string::npos) {
      variants_.push_back(p);
      return;
    }
    expand_hyphens(p, h + 1);
    p[h] = ' ';
    expand_hyphens(p, h + 1);
    p[h] = '-';
  }

  std::vector<std::string> variants_;
  std::vector<std::string> squashed_;
};

/// Canonical forms of the fields a filter looks at. Fields are joined with
/// newlines, which never occur in canonical phrases, so no match can span
/// two fields.
struct PostView {
  std::string body;
  std::string profile;
  std::string handle;  // squashed screen name

  static PostView of(const RawPost& p) {
    PostView v;
    v.handle = PhraseMatcher::squash(canonical_text(p.screen_name));
    v.body = canonical_text(p.text);
    if (p.quoted_text) v.body += "\n" + canonical_text(*p.quoted_text);
    if (p.extended_text) v.body += "\n" + canonical_text(*p.extended_text);
    v.profile = canonical_text(p.screen_name) + "\n" + canonical_text(p.user_description);
    return v;
  }
};

/// Which fields the keyword stage inspects. `text` is the standalone
/// definition; `text_and_profile` is what a keyword-tracking stream
/// delivers, and is what the full chain uses so that profile-only hits
/// reach the profile-only stage.
enum class KeywordScope { text, text_and_profile };

struct FilterConfig {
  std::vector<std::string> keywords = default_keywords();
  std::vector<std::string> stopphrases = default_stopphrases();
};

class RelevanceFilter {
 public:
  explicit RelevanceFilter(const FilterConfig& cfg = {})
      : keywords_(cfg.keywords), stop_(cfg.stopphrases) {
    if (keywords_.empty()) throw InputError("keyword list is empty");
  }

  bool keyword_hit(const PostView& v, KeywordScope scope) const {
    if (keywords_.matches(v.body)) return true;
    return scope == KeywordScope::text_and_profile && in_profile(v);
  }

  bool irrelevant(const PostView& v) const { return stop_.matches(v.body); }

  bool profile_only(const PostView& v) const {
    return !keywords_.matches(v.body) && in_profile(v);
  }

  bool in_profile(const PostView& v) const {
    return keywords_.matches(v.profile) || keywords_.matches_handle(v.handle);
  }

 private:
  PhraseMatcher keywords_;
  PhraseMatcher stop_;
};

// ---------------------------------------------------------------------------
// stages

inline std::vector<RawPost> keyword_filter(const std::vector<RawPost>& posts,
                                           const std::vector<std::string>& keywords,
                                           KeywordScope scope = KeywordScope::text) {
  RelevanceFilter f(FilterConfig{keywords, {}});
  std::vector<RawPost> out;
  for (const auto& p : posts) {
    if (f.keyword_hit(PostView::of(p), scope)) out.push_back(p);
  }
  return out;
}

inline std::vector<RawPost> exclude_irrelevant(const std::vector<RawPost>& posts,
                                               const std::vector<std::string>& stopphrases) {
  PhraseMatcher stop(stopphrases);
  std::vector<RawPost> out;
  for (const auto& p : posts) {
    if (!stop.matches(PostView::of(p).body)) out.push_back(p);
  }
  return out;
}

inline std::vector<RawPost> exclude_profile_only(const std::vector<RawPost>& posts,
                                                 const std::vector<std::string>& keywords) {
  RelevanceFilter f(FilterConfig{keywords, {}});
  std::vector<RawPost> out;
  for (const auto& p : posts) {
    if (!f.profile_only(PostView::of(p))) out.push_back(p);
  }
  return out;
}

struct DedupeResult {
  std::vector<RawPost> posts;
  std::size_t n_deduped = 0;
};

/// Keeps the first occurrence of each id.
inline DedupeResult dedupe(const std::vector<RawPost>& posts) {
  DedupeResult out;
  std::unordered_set<std::string> seen;
  for (const auto& p : posts) {
    if (seen.insert(p.id).second) {
      out.posts.push_back(p);
    } else {
      ++out.n_deduped;
    }
  }
  return out;
}

struct ChainResult {
  std::vector<RawPost> posts;
  FilterReport report;
};

/// keyword -> irrelevant -> profile-only -> dedupe, in input order.
inline ChainResult run_filter_chain(const std::vector<RawPost>& posts, const FilterConfig& cfg = {}) {
  RelevanceFilter f(cfg);
  ChainResult out;
  out.report.n_input = posts.size();
  std::unordered_set<std::string> seen;
  for (const auto& p : posts) {
    PostView v = PostView::of(p);
    if (!f.keyword_hit(v, KeywordScope::text_and_profile)) continue;
    ++out.report.n_keyword_matched;
    if (f.irrelevant(v)) {
      ++out.report.n_excluded_irrelevant;
      continue;
    }
    if (f.profile_only(v)) {
      ++out.report.n_excluded_profile_only;
      continue;
    }
    if (!seen.insert(p.id).second) {
      ++out.report.n_deduped;
      continue;
    }
    out.posts.push_back(p);
  }
  out.report.n_retained = out.posts.size();
  return out;
}

}  // namespace solsent::ingest
