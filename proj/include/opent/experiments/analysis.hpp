#pragma once

#include "opent/experiments/csv.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace opent::experiments {

/// Ordinary least-squares slope of y on x; NaN for fewer than two points.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = x.size();
  if (n < 2 || y.size() != n) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

/// Trend summary of one fig2_left curve pair.
struct ErrorTrend {
  int t_open = -1;               // first t with a nonzero error
  int points = 0;                // rows with t >= t_open
  double slope_spectral = NAN;   // linear slope over t >= t_open
  double slope_hs = NAN;
  double exponent_spectral = NAN;  // log-log slope, reported only
  double exponent_hs = NAN;
  double max_gap_ratio = 0.0;    // max (spectral - hs) / hs
  bool spectral_ge_hs = true;
};

inline ErrorTrend error_trend(const Table& t, const std::string& model, int n_sites, double floor = 1e-12) {
  ErrorTrend tr;
  std::vector<double> ts, sp, hs, lts, lsp, lhs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.text(r, "model") != model || static_cast<int>(t.number(r, "N")) != n_sites) continue;
    const double s = t.number(r, "spectral_error");
    const double h = t.number(r, "hs_error");
    const int step = static_cast<int>(t.number(r, "t"));
    if (h > s + 1e-9) tr.spectral_ge_hs = false;
    if (tr.t_open < 0 && (s > floor || h > floor)) tr.t_open = step;
    if (tr.t_open < 0) continue;
    ts.push_back(step);
    sp.push_back(s);
    hs.push_back(h);
    if (h > floor) tr.max_gap_ratio = std::max(tr.max_gap_ratio, (s - h) / h);
    if (s > floor && h > floor && step > 0) {
      lts.push_back(std::log(static_cast<double>(step)));
      lsp.push_back(std::log(s));
      lhs.push_back(std::log(h));
    }
  }
  tr.points = static_cast<int>(ts.size());
  tr.slope_spectral = least_squares_slope(ts, sp);
  tr.slope_hs = least_squares_slope(ts, hs);
  tr.exponent_spectral = least_squares_slope(lts, lsp);
  tr.exponent_hs = least_squares_slope(lts, lhs);
  return tr;
}

/// Half-chain LOE at (model, N, initial, t) from a fig4_loe table.
inline std::optional<double> loe_at(const Table& t, const std::string& model, int n_sites, const std::string& initial,
                                    int step) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.text(r, "model") == model && static_cast<int>(t.number(r, "N")) == n_sites &&
        t.text(r, "initial") == initial && static_cast<int>(t.number(r, "t")) == step) {
      return t.number(r, "loe");
    }
  }
  return std::nullopt;
}

}  // namespace opent::experiments
