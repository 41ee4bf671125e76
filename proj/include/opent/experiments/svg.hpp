#pragma once

#include "opent/experiments/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace opent::experiments::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Renders a plain SVG line chart. Points that cannot be placed on a log
/// axis are dropped.
inline std::string render(const LinePlot& plot, int width = 640, int height = 420) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double ml = 70, mr = 150, mt = 40, mb = 50;
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0) && (!plot.log_y || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ok(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
     << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick_label = [](double v, bool log) {
    std::ostringstream s;
    if (log) {
      s << "1e" << format_number(std::round(v * 100) / 100);
    } else {
      s << format_number(std::round(v * 1000) / 1000);
    }
    return s.str();
  };
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = ml + pw * i / 4.0, sy = mt + ph - ph * i / 4.0;
    os << "<text x=\"" << sx << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
       << tick_label(fx, plot.log_x) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << tick_label(fy, plot.log_y)
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
     << escape(plot.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << mt + ph / 2 << ")\">" << escape(plot.y_label) << "</text>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ok(s.x[i], s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = mt + 14 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Groups rows by the values of `key_cols` and collects (x_col, y_col).
inline std::vector<Series> series_from(const Table& t, const std::vector<std::string>& key_cols,
                                       const std::string& x_col, const std::string& y_col,
                                       const std::string& suffix = "") {
  std::map<std::string, Series> by_key;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string key;
    for (const auto& c : key_cols) key += (key.empty() ? "" : " ") + c + "=" + t.text(r, c);
    if (!by_key.count(key)) {
      order.push_back(key);
      by_key[key].label = key + suffix;
    }
    by_key[key].x.push_back(t.number(r, x_col));
    by_key[key].y.push_back(t.number(r, y_col));
  }
  std::vector<Series> out;
  for (const auto& k : order) out.push_back(by_key[k]);
  return out;
}

/// Default plots for the tables an experiment writes; empty when a table
/// has no natural line plot.
inline std::vector<std::pair<std::string, std::string>> plots_for(const Table& t) {
  std::vector<std::pair<std::string, std::string>> out;
  if (t.name == "fig2_left") {
    LinePlot p{"Truncation error vs layers", "t", "error", true, true, {}};
    for (auto& s : series_from(t, {"model", "N"}, "t", "spectral_error", " spectral")) p.series.push_back(s);
    for (auto& s : series_from(t, {"model", "N"}, "t", "hs_error", " HS")) p.series.push_back(s);
    out.emplace_back("fig2_left.svg", render(p));
  } else if (t.name == "fig4_loe") {
    LinePlot p{"Half-chain LOE (nats)", "t", "E1", true, false, {}};
    p.series = series_from(t, {"model", "N", "initial"}, "t", "loe");
    out.emplace_back("fig4_loe.svg", render(p));
  } else if (t.name == "fig2_right_norms") {
    LinePlot p{"Factor spectral norms by Schmidt index", "index", "norm", false, false, {}};
    p.series = series_from(t, {"model", "N"}, "index", "factor_norm");
    out.emplace_back("fig2_right.svg", render(p));
  }
  return out;
}

}  // namespace opent::experiments::svg
