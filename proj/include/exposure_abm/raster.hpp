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

// ESRI ASCII grid reader/writer restricted to integer cell values.

#ifndef EXPOSURE_ABM_RASTER_HPP_
#define EXPOSURE_ABM_RASTER_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/csv.hpp"
#include "exposure_abm/error.hpp"

namespace exposure_abm {

inline constexpr double kNominalCellSize = 30.0;

struct Raster {
  int ncols = 0;
  int nrows = 0;
  double xll = 0.0;
  double yll = 0.0;
  bool xll_is_center = false;
  double cellsize = kNominalCellSize;
  std::optional<std::int64_t> nodata;
  // Row-major, row 0 is the northernmost row as written in the file.
  std::vector<std::optional<std::int64_t>> cells;
  std::vector<std::string> warnings;

  std::size_t size() const { return cells.size(); }
  std::optional<std::int64_t> at(int col, int row) const {
    return cells.at(static_cast<std::size_t>(row) * ncols + col);
  }
};

namespace detail {

inline std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool LooksNumeric(std::string_view tok) {
  return !tok.empty() &&
         (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '-' || tok[0] == '+' ||
          tok[0] == '.');
}

}  // namespace detail

inline Raster ParseRaster(std::string_view text, const std::string& source) {
  Raster r;
  std::optional<double> ncols, nrows, xll, yll, cellsize;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t body_rows = 0;
  bool in_body = false;
  auto err = [&](const std::string& what) {
    Fail(ErrorKind::kParse, source + ":" + std::to_string(line_no) + ": " + what);
  };

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto toks = detail::Tokens(line);
    if (!toks.empty()) {
      if (!in_body && !detail::LooksNumeric(toks[0])) {
        if (toks.size() != 2) err("header lines must be 'key value'");
        const std::string key = detail::Lower(toks[0]);
        const double value = csv::ParseDouble(toks[1], source + ":" + std::to_string(line_no));
        if (key == "ncols") ncols = value;
        else if (key == "nrows") nrows = value;
        else if (key == "xllcorner") xll = value;
        else if (key == "xllcenter") xll = value, r.xll_is_center = true;
        else if (key == "yllcorner" || key == "yllcenter") yll = value;
        else if (key == "cellsize") cellsize = value;
        else if (key == "nodata_value")
          r.nodata = csv::ParseInt(toks[1], source + ":" + std::to_string(line_no));
        else err("unknown header key '" + std::string(toks[0]) + "'");
      } else {
        if (!in_body) {
          if (!ncols || !nrows || !xll || !yll || !cellsize)
            err("header needs ncols, nrows, xllcorner, yllcorner and cellsize");
          if (*ncols < 1 || *nrows < 1 || *ncols != static_cast<int>(*ncols) ||
              *nrows != static_cast<int>(*nrows))
            err("ncols and nrows must be positive integers");
          if (!(*cellsize > 0)) err("cellsize must be positive");
          r.ncols = static_cast<int>(*ncols);
          r.nrows = static_cast<int>(*nrows);
          r.xll = *xll;
          r.yll = *yll;
          r.cellsize = *cellsize;
          r.cells.reserve(static_cast<std::size_t>(r.ncols) * r.nrows);
          in_body = true;
        }
        ++body_rows;
        if (body_rows > static_cast<std::size_t>(r.nrows))
          err("more than nrows=" + std::to_string(r.nrows) + " data rows");
        if (toks.size() != static_cast<std::size_t>(r.ncols))
          err("data row " + std::to_string(body_rows) + " has " + std::to_string(toks.size()) +
              " values, expected ncols=" + std::to_string(r.ncols));
        for (const auto tok : toks) {
          const auto v = csv::ParseInt(tok, source + ":" + std::to_string(line_no) +
                                                ": data row " + std::to_string(body_rows));
          if (r.nodata && v == *r.nodata) r.cells.emplace_back(std::nullopt);
          else r.cells.emplace_back(v);
        }
      }
    }
    if (end == text.size()) break;
  }
  if (!in_body) Fail(ErrorKind::kParse, source + ": no data rows");
  if (body_rows != static_cast<std::size_t>(r.nrows))
    Fail(ErrorKind::kParse, source + ": expected " + std::to_string(r.nrows) +
                                " data rows, found " + std::to_string(body_rows));
  if (r.cellsize != kNominalCellSize)
    r.warnings.push_back(source + ": cellsize " + csv::FormatDouble(r.cellsize) +
                         " differs from the nominal 30 m");
  return r;
}

inline Raster LoadRaster(const std::filesystem::path& path) {
  return ParseRaster(csv::ReadFile(path), path.string());
}

inline std::string FormatRaster(const Raster& r) {
  std::string out;
  out += "ncols " + std::to_string(r.ncols) + "\n";
  out += "nrows " + std::to_string(r.nrows) + "\n";
  out += (r.xll_is_center ? "xllcenter " : "xllcorner ") + csv::FormatDouble(r.xll) + "\n";
  out += (r.xll_is_center ? "yllcenter " : "yllcorner ") + csv::FormatDouble(r.yll) + "\n";
  out += "cellsize " + csv::FormatDouble(r.cellsize) + "\n";
  const std::int64_t nodata = r.nodata.value_or(-9999);
  out += "NODATA_value " + std::to_string(nodata) + "\n";
  for (int row = 0; row < r.nrows; ++row) {
    for (int col = 0; col < r.ncols; ++col) {
      if (col) out += ' ';
      out += std::to_string(r.at(col, row).value_or(nodata));
    }
    out += '\n';
  }
  return out;
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_RASTER_HPP_
