#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "solsent/classify.hpp"
#include "solsent/error.hpp"
#include "solsent/geolocate.hpp"
#include "solsent/util.hpp"

namespace solsent::aggregate {

using classify::Label;
using classify::SentimentPrediction;
using geo::StateCode;

/// Two-sided 95% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0;
  double high = 0;
};

/// Wilson score interval for a binomial proportion k/n.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = kZ95) {
  if (n == 0) throw StageError("wilson_interval: n = 0");
  if (k > n) throw StageError("wilson_interval: k > n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  // clamp keeps p inside the interval at k = 0 and k = n despite rounding
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

struct StateSentiment {
  StateCode state;
  std::size_t n_tweets = 0;
  std::size_t n_positive = 0;
  double score = 0;
  double ci_low = 0;
  double ci_high = 0;
  double tweets_per_million = 0;
};

struct DailyPoint {
  Date date;
  std::size_t n_tweets = 0;
  std::size_t n_positive = 0;
  double mean_score = 0;
};

/// Per-state positive/total counts. Merging two shards adds counts.
struct StateCounts {
  std::array<std::size_t, StateCode::count> n{};
  std::array<std::size_t, StateCode::count> pos{};

  void add(StateCode s, Label l) {
    ++n[s.index()];
    if (l == Label::positive) ++pos[s.index()];
  }

  StateCounts& merge(const StateCounts& o) {
    for (std::size_t i = 0; i < StateCode::count; ++i) {
      n[i] += o.n[i];
      pos[i] += o.pos[i];
    }
    return *this;
  }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto v : n) t += v;
    return t;
  }
};

// ---------------------------------------------------------------------------
// population

class Population {
 public:
  static Population from_table(const CsvTable& t) {
    Population p;
    const auto c_code = t.column("state_code");
    const auto c_pop = t.column("population");
    for (const auto& r : t.rows()) {
      auto code = StateCode::parse(r.cells[c_code]);
      if (!code) throw InputError(t.where(r) + ": unknown state code '" + r.cells[c_code] + "'");
      auto v = parse_int(r.cells[c_pop]);
      if (!v || *v <= 0) throw InputError(t.where(r) + ": population must be a positive integer");
      if (p.count_[code->index()]) throw InputError(t.where(r) + ": duplicate state " + std::string(code->code()));
      p.count_[code->index()] = *v;
    }
    return p;
  }

  static Population load(const std::string& path) { return from_table(CsvTable::load(path)); }

  void set(StateCode s, long long v) { count_[s.index()] = v; }

  std::optional<long long> get(StateCode s) const { return count_[s.index()]; }

 private:
  std::array<std::optional<long long>, StateCode::count> count_{};
};

// ---------------------------------------------------------------------------
// state scores

inline StateCounts count_by_state(std::span<const SentimentPrediction> predictions,
                                  std::span<const geo::GeoResolution> resolutions) {
  std::unordered_map<std::string_view, StateCode> where;
  where.reserve(resolutions.size());
  for (const auto& r : resolutions) {
    if (r.resolved()) where.emplace(r.post_id, *r.state);
  }
  StateCounts c;
  for (const auto& p : predictions) {
    auto it = where.find(p.post_id);
    if (it == where.end()) throw StageError("prediction " + p.post_id + " has no state resolution");
    c.add(it->second, p.label);
  }
  return c;
}

/// Score = 10 x positive share; CI = 10 x Wilson interval. States with no
/// posts are omitted. Output is ordered by state code.
inline std::vector<StateSentiment> state_scores(const StateCounts& counts, const Population& population) {
  std::vector<StateSentiment> out;
  for (auto s : StateCode::all()) {
    const auto n = counts.n[s.index()];
    if (n == 0) continue;
    auto pop = population.get(s);
    if (!pop) throw InputError("population table has no row for " + std::string(s.code()));
    const auto k = counts.pos[s.index()];
    auto ci = wilson_interval(k, n);
    StateSentiment row;
    row.state = s;
    row.n_tweets = n;
    row.n_positive = k;
    row.score = 10.0 * static_cast<double>(k) / static_cast<double>(n);
    row.ci_low = 10.0 * ci.low;
    row.ci_high = 10.0 * ci.high;
    row.tweets_per_million = 1e6 * static_cast<double>(n) / static_cast<double>(*pop);
    out.push_back(row);
  }
  return out;
}

inline std::vector<StateSentiment> state_scores(std::span<const SentimentPrediction> predictions,
                                                std::span<const geo::GeoResolution> resolutions,
                                                const Population& population) {
  return state_scores(count_by_state(predictions, resolutions), population);
}

enum class NationalMode { tweet_weighted, state_mean };

/// tweet_weighted: 10 x overall positive share; state_mean: unweighted
/// mean of state scores.
inline double national_average(std::span<const StateSentiment> states, NationalMode mode) {
  if (states.empty()) throw StageError("national_average: no states with data");
  if (mode == NationalMode::tweet_weighted) {
    std::size_t n = 0, k = 0;
    for (const auto& s : states) {
      n += s.n_tweets;
      k += s.n_positive;
    }
    if (n == 0) throw StageError("national_average: no posts");
    return 10.0 * static_cast<double>(k) / static_cast<double>(n);
  }
  double sum = 0;
  for (const auto& s : states) sum += s.score;
  return sum / static_cast<double>(states.size());
}

inline double national_average(std::span<const SentimentPrediction> predictions,
                               std::span<const geo::GeoResolution> resolutions, NationalMode mode) {
  if (predictions.empty()) throw StageError("national_average: no predictions");
  auto counts = count_by_state(predictions, resolutions);
  std::vector<StateSentiment> states;
  for (auto s : StateCode::all()) {
    auto n = counts.n[s.index()];
    if (n == 0) continue;
    StateSentiment row;
    row.state = s;
    row.n_tweets = n;
    row.n_positive = counts.pos[s.index()];
    row.score = 10.0 * static_cast<double>(row.n_positive) / static_cast<double>(n);
    states.push_back(row);
  }
  return national_average(states, mode);
}

// ---------------------------------------------------------------------------
// daily series

using Timestamps = std::unordered_map<std::string, Timestamp>;

/// One point per UTC day with at least one post; days inside `exclude`
/// are dropped.
inline std::vector<DailyPoint> daily_series(std::span<const SentimentPrediction> predictions,
                                            const Timestamps& timestamps,
                                            const std::optional<DateRange>& exclude = std::nullopt) {
  if (exclude && exclude->last < exclude->first) throw InputError("exclusion range ends before it starts");
  std::map<Date, std::pair<std::size_t, std::size_t>> days;
  for (const auto& p : predictions) {
    auto it = timestamps.find(p.post_id);
    if (it == timestamps.end()) throw StageError("prediction " + p.post_id + " has no timestamp");
    Date d = utc_date(it->second);
    if (exclude && exclude->contains(d)) continue;
    auto& slot = days[d];
    ++slot.first;
    if (p.label == Label::positive) ++slot.second;
  }
  std::vector<DailyPoint> out;
  for (const auto& [d, c] : days) {
    out.push_back({d, c.first, c.second, 10.0 * static_cast<double>(c.second) / static_cast<double>(c.first)});
  }
  return out;
}

/// Predictions whose post falls outside `window`, in input order.
inline std::vector<SentimentPrediction> outside_window(std::span<const SentimentPrediction> predictions,
                                                       const Timestamps& timestamps, const DateRange& window) {
  std::vector<SentimentPrediction> out;
  for (const auto& p : predictions) {
    auto it = timestamps.find(p.post_id);
    if (it == timestamps.end()) throw StageError("prediction " + p.post_id + " has no timestamp");
    if (!window.contains(utc_date(it->second))) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_state_scores_csv(std::ostream& os, std::span<const StateSentiment> states) {
  os << "state,score,n,ci_low,ci_high,tweets_per_million\n";
  for (const auto& s : states) {
    os << s.state.code() << ',' << format_fixed(s.score, 6) << ',' << s.n_tweets << ','
       << format_fixed(s.ci_low, 6) << ',' << format_fixed(s.ci_high, 6) << ','
       << format_fixed(s.tweets_per_million, 6) << '\n';
  }
}

inline void write_daily_csv(std::ostream& os, std::span<const DailyPoint> points) {
  os << "date,n,mean_score\n";
  for (const auto& p : points) os << p.date.str() << ',' << p.n_tweets << ',' << format_fixed(p.mean_score, 6) << '\n';
}

}  // namespace solsent::aggregate
