// Copyright 2026 The Exposure ABM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Self-contained SVG line charts of at-risk rates over time.

#ifndef EXPOSURE_ABM_SVG_PLOT_HPP_
#define EXPOSURE_ABM_SVG_PLOT_HPP_

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exposure_abm/csv.hpp"
#include "exposure_abm/error.hpp"

namespace exposure_abm::plot {

enum class CsvSchema { kTrajectory, kSweep, kScenarios };

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (tick, rate)
};

struct Chart {
  std::string title;
  std::vector<Series> series;
};

inline CsvSchema DetectSchema(const std::vector<std::string>& header) {
  using H = std::vector<std::string>;
  if (header == H{"tick", "group", "at_risk_count", "at_risk_rate"}) return CsvSchema::kTrajectory;
  if (header == H{"alpha", "road", "tick", "mean_rate", "min", "max"}) return CsvSchema::kSweep;
  if (header == H{"scenario", "ac", "tick", "group", "mean_rate"}) return CsvSchema::kScenarios;
  std::string joined;
  for (const auto& h : header) joined += (joined.empty() ? "" : ",") + h;
  Fail(ErrorKind::kParse, "unknown CSV schema: header '" + joined + "'");
}

// Trajectory: one series per group. Sweep: one per (alpha, road) cell.
// Scenarios: one per (scenario, AC) using the all-agent rate.
inline Chart ChartFromCsv(const csv::Table& table) {
  const CsvSchema schema = DetectSchema(table.header);
  Chart chart;
  std::map<std::string, std::size_t> index;
  auto add = [&](const std::string& label, double x, double y) {
    auto [it, inserted] = index.emplace(label, chart.series.size());
    if (inserted) chart.series.push_back({label, {}});
    chart.series[it->second].points.emplace_back(x, y);
  };
  for (const auto& row : table.rows) {
    const auto where = csv::Where(table, row);
    const auto& f = row.fields;
    switch (schema) {
      case CsvSchema::kTrajectory:
        add(f[1], csv::ParseDouble(f[0], where), csv::ParseDouble(f[3], where));
        break;
      case CsvSchema::kSweep:
        add("alpha=" + f[0] + " road=" + f[1], csv::ParseDouble(f[2], where),
            csv::ParseDouble(f[3], where));
        break;
      case CsvSchema::kScenarios:
        if (f[3] != "all") break;
        add(f[0] + "-AC" + f[1], csv::ParseDouble(f[2], where), csv::ParseDouble(f[4], where));
        break;
    }
  }
  switch (schema) {
    case CsvSchema::kTrajectory: chart.title = "At-risk rate by age group"; break;
    case CsvSchema::kSweep: chart.title = "At-risk rate by alpha and road multiplier"; break;
    case CsvSchema::kScenarios: chart.title = "At-risk rate by scenario"; break;
  }
  return chart;
}

inline std::string EscapeXml(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Layout {
  double width = 800, height = 480;
  double left = 70, right = 220, top = 40, bottom = 50;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

inline std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Time on x, proportion at risk on y (0..1, SVG y inverted).
inline std::string RenderSvg(const Chart& chart, const Layout& L = {}) {
  static constexpr std::array<std::string_view, 10> kPalette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double x_max = 1.0;
  for (const auto& s : chart.series)
    for (const auto& [x, _] : s.points) x_max = std::max(x_max, x);
  auto sx = [&](double x) { return L.left + x / x_max * L.plot_w(); };
  auto sy = [&](double y) { return L.top + (1.0 - std::clamp(y, 0.0, 1.0)) * L.plot_h(); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(L.width) + "\" height=\"" +
         Num(L.height) + "\" viewBox=\"0 0 " + Num(L.width) + " " + Num(L.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + Num(L.left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         EscapeXml(chart.title) + "</text>\n";
  out += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out += "<line x1=\"" + Num(L.left) + "\" y1=\"" + Num(sy(0)) + "\" x2=\"" + Num(sx(x_max)) +
         "\" y2=\"" + Num(sy(0)) + "\"/>\n";
  out += "<line x1=\"" + Num(L.left) + "\" y1=\"" + Num(sy(0)) + "\" x2=\"" + Num(L.left) +
         "\" y2=\"" + Num(sy(1)) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = k / 5.0;
    out += "<text x=\"" + Num(L.left - 8) + "\" y=\"" + Num(sy(y) + 4) +
           "\" text-anchor=\"end\">" + Num(y) + "</text>\n";
    const double x = x_max * k / 5.0;
    out += "<text x=\"" + Num(sx(x)) + "\" y=\"" + Num(sy(0) + 18) +
           "\" text-anchor=\"middle\">" + std::to_string(static_cast<long long>(x)) + "</text>\n";
  }
  out += "<text x=\"" + Num(L.left + L.plot_w() / 2) + "\" y=\"" + Num(L.height - 8) +
         "\" text-anchor=\"middle\">tick</text>\n";
  out += "<text x=\"16\" y=\"" + Num(L.top + L.plot_h() / 2) + "\" text-anchor=\"middle\" " +
         "transform=\"rotate(-90 16 " + Num(L.top + L.plot_h() / 2) +
         ")\">proportion at risk</text>\n</g>\n";

  out += "<g class=\"series\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    out += "<polyline data-label=\"" + EscapeXml(s.label) + "\" stroke=\"" +
           std::string(kPalette[i % kPalette.size()]) + "\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k) out += ' ';
      out += Num(sx(s.points[k].first)) + "," + Num(sy(s.points[k].second));
    }
    out += "\"/>\n";
  }
  out += "</g>\n<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const double y = L.top + 10 + 18.0 * static_cast<double>(i);
    const double x = L.width - L.right + 16;
    out += "<g class=\"legend-entry\"><line x1=\"" + Num(x) + "\" y1=\"" + Num(y) + "\" x2=\"" +
           Num(x + 20) + "\" y2=\"" + Num(y) + "\" stroke=\"" +
           std::string(kPalette[i % kPalette.size()]) + "\" stroke-width=\"2\"/><text x=\"" +
           Num(x + 26) + "\" y=\"" + Num(y + 4) + "\">" + EscapeXml(chart.series[i].label) +
           "</text></g>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

// An empty file renders as bare axes.
inline std::string RenderCsv(std::string_view csv_text, const std::string& source) {
  if (csv::Trim(csv_text).empty()) return RenderSvg(Chart{"At-risk rate", {}});
  return RenderSvg(ChartFromCsv(csv::ParseText(csv_text, source)));
}

}  // namespace exposure_abm::plot

#endif  // EXPOSURE_ABM_SVG_PLOT_HPP_
