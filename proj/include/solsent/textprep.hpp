#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "solsent/util.hpp"

namespace solsent::textprep {

/// Classifier-ready text for one post.
struct NormalizedText {
  std::string value;
  std::string source_id;
};

namespace detail {

inline bool starts_with_ci(std::string_view s, std::size_t at, std::string_view prefix) {
  if (at + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[at + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

/// Offset of the first link start inside a token, or npos.
inline std::size_t find_link(std::string_view token) {
  static constexpr std::string_view starts[] = {"http://", "https://", "pic.twitter.com/", "t.co/"};
  for (std::size_t i = 0; i < token.size(); ++i) {
    for (auto s : starts) {
      if (starts_with_ci(token, i, s)) return i;
    }
  }
  return std::string_view::npos;
}

/// `@name` followed optionally by ':'.
inline bool is_mention_token(std::string_view t) {
  if (t.size() < 2 || t[0] != '@') return false;
  std::size_t i = 1;
  while (i < t.size() && is_word_char(t[i])) ++i;
  if (i == 1) return false;
  return i == t.size() || (i + 1 == t.size() && t[i] == ':');
}

inline bool has_alnum(std::string_view s) {
  for (char c : s) {
    if (is_word_char(c) || static_cast<unsigned char>(c) >= 0x80) return true;
  }
  return false;
}

}  // namespace detail

/// Strips links, the leading retweet marker, mentions and hashtag signs,
/// and collapses whitespace. Total and idempotent; output is never longer
/// than the input.
inline std::string normalize(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto tok : split_ws(text)) {
    auto link = detail::find_link(tok);
    if (link != std::string_view::npos) tok = tok.substr(0, link);
    if (!tok.empty()) tokens.emplace_back(tok);
  }

  // leading "RT @name:" markers, possibly repeated
  std::size_t skip = 0;
  while (skip + 1 < tokens.size() && tokens[skip] == "RT" && detail::is_mention_token(tokens[skip + 1])) {
    skip += 2;
  }

  std::vector<std::string> kept;
  kept.reserve(tokens.size() - skip);
  for (std::size_t k = skip; k < tokens.size(); ++k) {
    std::string tok = std::move(tokens[k]);
    bool dropped = false;
    while (tok.size() > 1 && tok[0] == '@' && is_word_char(tok[1])) {
      std::size_t i = 1;
      while (i < tok.size() && is_word_char(tok[i])) ++i;
      std::string rest = tok.substr(i);
      if (!detail::has_alnum(rest)) {
        dropped = true;
        break;
      }
      tok = std::move(rest);
    }
    if (dropped) continue;
    std::size_t hashes = 0;
    while (hashes < tok.size() && tok[hashes] == '#') ++hashes;
    if (hashes > 0 && hashes < tok.size() &&
        (is_word_char(tok[hashes]) || static_cast<unsigned char>(tok[hashes]) >= 0x80)) {
      tok.erase(0, hashes);
    }
    if (!tok.empty()) kept.push_back(std::move(tok));
  }
  return join(kept, " ");
}

inline NormalizedText normalize_post(std::string_view text, std::string source_id) {
  return NormalizedText{normalize(text), std::move(source_id)};
}

}  // namespace solsent::textprep
