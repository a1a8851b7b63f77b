#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "solsent/aggregate.hpp"
#include "solsent/geolocate.hpp"
#include "solsent/util.hpp"

namespace solsent::svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) { return format_fixed(v, 2); }

/// Minimal SVG document builder.
class Document {
 public:
  Document(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    body_ << "  <rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\"" << (extra.empty() ? "" : " ") << extra << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1) {
    body_ << "  <line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }

  void text(double x, double y, std::string_view content, std::string_view anchor = "start", int size = 11,
            std::string_view extra = {}) {
    body_ << "  <text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size << "\" text-anchor=\""
          << anchor << "\"" << (extra.empty() ? "" : " ") << extra << ">" << escape(content) << "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke) {
    body_ << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      body_ << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
    }
    body_ << "\"/>\n";
  }

  void raw(std::string_view s) { body_ << s; }

  std::string str() const {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
       << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\" font-family=\"sans-serif\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << num(width_) << "\" height=\"" << num(height_) << "\" fill=\"#ffffff\"/>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  double width_, height_;
  std::ostringstream body_;
};

// Tile-grid positions (column, row) for a state choropleth.
struct Tile {
  std::string_view code;
  int col;
  int row;
};

inline constexpr std::array<Tile, 51> kTiles = {{
    {"AK", 0, 0}, {"ME", 11, 0},
    {"WI", 6, 1}, {"VT", 10, 1}, {"NH", 11, 1},
    {"WA", 1, 2}, {"ID", 2, 2}, {"MT", 3, 2}, {"ND", 4, 2}, {"MN", 5, 2}, {"IL", 6, 2}, {"MI", 7, 2},
    {"NY", 9, 2}, {"MA", 10, 2},
    {"OR", 1, 3}, {"NV", 2, 3}, {"WY", 3, 3}, {"SD", 4, 3}, {"IA", 5, 3}, {"IN", 6, 3}, {"OH", 7, 3},
    {"PA", 8, 3}, {"NJ", 9, 3}, {"CT", 10, 3}, {"RI", 11, 3},
    {"CA", 1, 4}, {"UT", 2, 4}, {"CO", 3, 4}, {"NE", 4, 4}, {"MO", 5, 4}, {"KY", 6, 4}, {"WV", 7, 4},
    {"VA", 8, 4}, {"MD", 9, 4}, {"DE", 10, 4},
    {"AZ", 2, 5}, {"NM", 3, 5}, {"KS", 4, 5}, {"AR", 5, 5}, {"TN", 6, 5}, {"NC", 7, 5}, {"SC", 8, 5},
    {"DC", 9, 5},
    {"OK", 4, 6}, {"LA", 5, 6}, {"MS", 6, 6}, {"AL", 7, 6}, {"GA", 8, 6},
    {"HI", 0, 7}, {"TX", 4, 7}, {"FL", 9, 7},
}};

/// Five equal-width bins over [0, 10].
inline constexpr std::array<std::string_view, 5> kBinColors = {"#d7191c", "#fdae61", "#ffffbf", "#a6d96a", "#1a9641"};
inline constexpr std::string_view kNoDataColor = "#cccccc";

inline std::size_t score_bin(double score) {
  auto b = static_cast<std::size_t>(std::clamp(score, 0.0, 10.0) / 2.0);
  return std::min<std::size_t>(b, 4);
}

inline std::string choropleth(std::span<const aggregate::StateSentiment> states, std::string_view title) {
  constexpr double cell = 56, gap = 4, left = 20, top = 50;
  Document doc(left * 2 + 12 * (cell + gap), top + 8 * (cell + gap) + 70);
  doc.text(left, 30, title, "start", 16);
  std::array<const aggregate::StateSentiment*, geo::StateCode::count> by_state{};
  for (const auto& s : states) by_state[s.state.index()] = &s;
  for (const auto& t : kTiles) {
    auto code = geo::StateCode::parse(t.code);
    const auto* s = by_state[code->index()];
    double x = left + t.col * (cell + gap);
    double y = top + t.row * (cell + gap);
    std::string data = "data-state=\"" + std::string(t.code) + "\"";
    if (s) data += " data-value=\"" + format_fixed(s->score, 6) + "\"";
    doc.rect(x, y, cell, cell, s ? kBinColors[score_bin(s->score)] : kNoDataColor, data);
    doc.text(x + cell / 2, y + 22, t.code, "middle", 13);
    doc.text(x + cell / 2, y + 42, s ? num(s->score) : "no data", "middle", s ? 11 : 9);
  }
  double ly = top + 8 * (cell + gap) + 10;
  doc.text(left, ly + 12, "Sentiment score (0-10)", "start", 12);
  for (std::size_t b = 0; b < kBinColors.size(); ++b) {
    double x = left + 160 + static_cast<double>(b) * 90;
    doc.rect(x, ly, 20, 16, kBinColors[b]);
    std::string label = format_fixed(2.0 * static_cast<double>(b), 0) + "-" + format_fixed(2.0 * static_cast<double>(b + 1), 0);
    doc.text(x + 26, ly + 12, label, "start", 11);
  }
  doc.rect(left + 160 + 5 * 90, ly, 20, 16, kNoDataColor);
  doc.text(left + 160 + 5 * 90 + 26, ly + 12, "no data", "start", 11);
  return doc.str();
}

/// Horizontal bars sorted by score, with 95% CI whiskers.
inline std::string score_bars(std::span<const aggregate::StateSentiment> states, std::optional<double> national,
                              std::string_view title) {
  std::vector<const aggregate::StateSentiment*> order;
  for (const auto& s : states) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    return a->score != b->score ? a->score > b->score : a->state < b->state;
  });
  constexpr double row_h = 16, left = 60, top = 50, plot_w = 500;
  const double height = top + row_h * static_cast<double>(order.size()) + 50;
  Document doc(left + plot_w + 120, height);
  doc.text(10, 30, title, "start", 16);
  auto sx = [&](double v) { return left + plot_w * v / 10.0; };
  for (int tick = 0; tick <= 10; tick += 2) {
    double x = sx(tick);
    doc.line(x, top - 5, x, height - 40, "#eeeeee");
    doc.text(x, height - 25, std::to_string(tick), "middle", 10);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& s = *order[i];
    double y = top + row_h * static_cast<double>(i);
    doc.text(left - 6, y + 11, s.state.code(), "end", 10);
    std::string data = "data-state=\"" + std::string(s.state.code()) + "\" data-value=\"" + format_fixed(s.score, 6) +
                       "\" data-ci-low=\"" + format_fixed(s.ci_low, 6) + "\" data-ci-high=\"" +
                       format_fixed(s.ci_high, 6) + "\"";
    doc.rect(left, y + 2, sx(s.score) - left, row_h - 4, "#4575b4", data);
    doc.line(sx(s.ci_low), y + row_h / 2, sx(s.ci_high), y + row_h / 2, "#000000");
    doc.line(sx(s.ci_low), y + 4, sx(s.ci_low), y + row_h - 4, "#000000");
    doc.line(sx(s.ci_high), y + 4, sx(s.ci_high), y + row_h - 4, "#000000");
    doc.text(sx(10) + 8, y + 11, num(s.score) + " (n=" + std::to_string(s.n_tweets) + ")", "start", 10);
  }
  if (national) {
    double x = sx(*national);
    doc.line(x, top - 5, x, height - 40, "#d73027", 1.5);
    doc.text(x, top - 8, "national " + num(*national), "middle", 10, "data-value=\"" + format_fixed(*national, 6) + "\"");
  }
  return doc.str();
}

/// Daily mean score over time. An optional window is shaded.
inline std::string trend(std::span<const aggregate::DailyPoint> points, std::optional<DateRange> shaded,
                         std::string_view title) {
  constexpr double left = 50, top = 50, plot_w = 760, plot_h = 300;
  Document doc(left + plot_w + 30, top + plot_h + 70);
  doc.text(10, 30, title, "start", 16);
  auto sy = [&](double v) { return top + plot_h * (1.0 - v / 10.0); };
  for (int tick = 0; tick <= 10; tick += 2) {
    doc.line(left, sy(tick), left + plot_w, sy(tick), "#eeeeee");
    doc.text(left - 6, sy(tick) + 4, std::to_string(tick), "end", 10);
  }
  if (points.empty()) {
    doc.text(left + plot_w / 2, top + plot_h / 2, "no data", "middle", 14);
    return doc.str();
  }
  const auto d0 = points.front().date.day;
  const auto d1 = points.back().date.day;
  const double span_days = std::max(1.0, static_cast<double>((d1 - d0).count()));
  auto sx = [&](Date d) { return left + plot_w * static_cast<double>((d.day - d0).count()) / span_days; };
  if (shaded) {
    double x0 = std::clamp(sx(shaded->first), left, left + plot_w);
    double x1 = std::clamp(sx(Date{shaded->last.day + std::chrono::days{1}}), left, left + plot_w);
    if (x1 > x0) {
      doc.rect(x0, top, x1 - x0, plot_h, "#fee0d2",
               "data-excluded=\"" + shaded->str() + "\"");
    }
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) pts.emplace_back(sx(p.date), sy(p.mean_score));
  doc.polyline(pts, "#2166ac");
  for (const auto& p : points) {
    doc.raw("  <circle cx=\"" + num(sx(p.date)) + "\" cy=\"" + num(sy(p.mean_score)) + "\" r=\"2\" fill=\"#2166ac\" data-date=\"" +
            p.date.str() + "\" data-n=\"" + std::to_string(p.n_tweets) + "\" data-value=\"" +
            format_fixed(p.mean_score, 6) + "\"/>\n");
  }
  doc.text(left, top + plot_h + 20, points.front().date.str(), "start", 10);
  doc.text(left + plot_w, top + plot_h + 20, points.back().date.str(), "end", 10);
  return doc.str();
}

}  // namespace solsent::svg
