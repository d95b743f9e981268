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

// The grid world of one district: 30 m cells classified by land cover, a
// land-price grade per residential cell, and the walkable index agents move
// over.

#ifndef EXPOSURE_ABM_ENVIRONMENT_HPP_
#define EXPOSURE_ABM_ENVIRONMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/error.hpp"
#include "exposure_abm/raster.hpp"
#include "json.hpp"

namespace exposure_abm {

enum class LandClass : std::uint8_t {
  kOther = 0,
  kResidential = 110,
  kCommercial = 120,
  kTraffic = 150,
};

constexpr LandClass LandClassFromCode(std::optional<std::int64_t> code) {
  if (!code) return LandClass::kOther;
  switch (*code) {
    case 110: return LandClass::kResidential;
    case 120: return LandClass::kCommercial;
    case 150: return LandClass::kTraffic;
    default: return LandClass::kOther;
  }
}

constexpr std::string_view ToString(LandClass c) {
  switch (c) {
    case LandClass::kResidential: return "residential";
    case LandClass::kCommercial: return "commercial";
    case LandClass::kTraffic: return "traffic";
    case LandClass::kOther: return "other";
  }
  return "other";
}

constexpr bool IsWalkable(LandClass c) { return c != LandClass::kOther; }

struct Cell {
  std::int32_t col = 0;
  std::int32_t row = 0;
  LandClass land_class = LandClass::kOther;
  bool is_road = false;
  std::uint8_t price_grade = 0;  // 1..G; 0 means no grade
  std::uint32_t district = 0;    // index of the owning world in its region

  bool has_grade() const { return price_grade != 0; }
};

using CellIndex = std::uint32_t;

struct World {
  std::string district_id;
  int ncols = 0;
  int nrows = 0;
  double cell_size = kNominalCellSize;
  std::vector<Cell> cells;            // row-major
  std::vector<CellIndex> walkable;    // ascending
  std::vector<CellIndex> residential; // ascending
  std::vector<std::string> warnings;

  CellIndex index(int col, int row) const {
    return static_cast<CellIndex>(row * ncols + col);
  }
  const Cell& at(int col, int row) const { return cells.at(index(col, row)); }
  bool contains(int col, int row) const {
    return col >= 0 && row >= 0 && col < ncols && row < nrows;
  }
};

// Per-tick recovery indexed by land-price grade (1-based).
class RecoveryTable {
 public:
  RecoveryTable() : RecoveryTable(Default()) {}

  explicit RecoveryTable(std::vector<double> per_grade) : per_grade_(std::move(per_grade)) {
    Require(!per_grade_.empty(), ErrorKind::kValidation, "recovery table is empty");
    for (std::size_t i = 0; i < per_grade_.size(); ++i) {
      Require(std::isfinite(per_grade_[i]) && per_grade_[i] >= 0.0, ErrorKind::kValidation,
              "recovery values must be finite and non-negative");
      Require(i == 0 || per_grade_[i] >= per_grade_[i - 1], ErrorKind::kValidation,
              "recovery values must be non-decreasing in price grade");
    }
  }

  // Illustrative default: grade g recovers 0.1 * g units per tick.
  static RecoveryTable Default(int grades = 5) {
    std::vector<double> v;
    for (int g = 1; g <= grades; ++g) v.push_back(g / 10.0);
    return RecoveryTable(std::move(v));
  }

  static RecoveryTable Zero(int grades = 5) {
    return RecoveryTable(std::vector<double>(static_cast<std::size_t>(grades), 0.0));
  }

  int grades() const { return static_cast<int>(per_grade_.size()); }
  const std::vector<double>& values() const { return per_grade_; }

  double at(int grade) const {
    Require(grade >= 1 && grade <= grades(), ErrorKind::kValidation,
            "price grade " + std::to_string(grade) + " outside recovery table");
    return per_grade_[static_cast<std::size_t>(grade - 1)];
  }

 private:
  std::vector<double> per_grade_;
};

enum class PriceRasterKind { kGrade, kPrice };

// Quantile cut points splitting `values` into `grades` equally populated bins.
inline std::vector<std::int64_t> QuantileCuts(std::vector<std::int64_t> values, int grades) {
  std::sort(values.begin(), values.end());
  std::vector<std::int64_t> cuts;
  if (values.empty()) return cuts;
  for (int k = 1; k < grades; ++k) {
    const std::size_t pos = values.size() * static_cast<std::size_t>(k) / grades;
    cuts.push_back(values[std::min(pos, values.size() - 1)]);
  }
  return cuts;
}

inline int GradeOf(std::int64_t price, const std::vector<std::int64_t>& cuts) {
  return 1 + static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), price) - cuts.begin());
}

inline World BuildWorld(const Raster& land_cover, const Raster& land_price,
                        std::string district_id,
                        PriceRasterKind price_kind = PriceRasterKind::kGrade,
                        int grades = 5, std::uint32_t district_index = 0) {
  Require(land_cover.ncols > 0 && land_cover.nrows > 0, ErrorKind::kValidation,
          district_id + ": empty land-cover raster");
  Require(land_cover.ncols == land_price.ncols && land_cover.nrows == land_price.nrows,
          ErrorKind::kValidation,
          district_id + ": land-cover and land-price rasters differ in dimensions");
  Require(grades >= 1 && grades <= 255, ErrorKind::kValidation, "grade count must be 1..255");

  World w;
  w.district_id = std::move(district_id);
  w.ncols = land_cover.ncols;
  w.nrows = land_cover.nrows;
  w.cell_size = land_cover.cellsize;
  w.warnings = land_cover.warnings;
  w.warnings.insert(w.warnings.end(), land_price.warnings.begin(), land_price.warnings.end());

  std::vector<std::int64_t> cuts;
  if (price_kind == PriceRasterKind::kPrice) {
    std::vector<std::int64_t> residential_prices;
    for (std::size_t i = 0; i < land_cover.size(); ++i)
      if (LandClassFromCode(land_cover.cells[i]) == LandClass::kResidential &&
          land_price.cells[i])
        residential_prices.push_back(*land_price.cells[i]);
    cuts = QuantileCuts(std::move(residential_prices), grades);
  }

  w.cells.resize(land_cover.size());
  for (int row = 0; row < w.nrows; ++row) {
    for (int col = 0; col < w.ncols; ++col) {
      const CellIndex i = w.index(col, row);
      Cell& c = w.cells[i];
      c.col = col;
      c.row = row;
      c.district = district_index;
      c.land_class = LandClassFromCode(land_cover.cells[i]);
      c.is_road = c.land_class == LandClass::kTraffic;
      const auto& price = land_price.cells[i];
      if (price) {
        if (price_kind == PriceRasterKind::kGrade) {
          if (*price >= 1 && *price <= grades) c.price_grade = static_cast<std::uint8_t>(*price);
          else if (c.land_class == LandClass::kResidential)
            Fail(ErrorKind::kValidation, w.district_id + ": grade " + std::to_string(*price) +
                                             " at col " + std::to_string(col) + " row " +
                                             std::to_string(row) + " outside 1.." +
                                             std::to_string(grades));
        } else {
          c.price_grade = static_cast<std::uint8_t>(GradeOf(*price, cuts));
        }
      }
      if (c.land_class == LandClass::kResidential && !c.has_grade())
        Fail(ErrorKind::kValidation, w.district_id + ": residential cell at col " +
                                         std::to_string(col) + " row " + std::to_string(row) +
                                         " has no land price");
      if (IsWalkable(c.land_class)) w.walkable.push_back(i);
      if (c.land_class == LandClass::kResidential) w.residential.push_back(i);
    }
  }
  return w;
}

inline double CellPm10(const Cell& cell, double background, double road_multiplier) {
  return cell.is_road ? background * road_multiplier : background;
}

// Offsets (dcol, drow) with dcol^2 + drow^2 <= r^2, in row-major order.
inline std::vector<std::pair<int, int>> DiskOffsets(double radius) {
  std::vector<std::pair<int, int>> out;
  if (!(radius >= 0)) return out;
  const int reach = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (int dr = -reach; dr <= reach; ++dr)
    for (int dc = -reach; dc <= reach; ++dc)
      if (static_cast<double>(dc * dc + dr * dr) <= r2) out.emplace_back(dc, dr);
  return out;
}

// Walkable cells within Euclidean distance `radius` (cell units) of `center`,
// ascending by index. Includes `center` itself when walkable.
inline std::vector<CellIndex> NeighborsWithin(const World& world, CellIndex center,
                                              double radius) {
  Require(radius >= 0, ErrorKind::kValidation, "radius must be non-negative");
  const Cell& c = world.cells.at(center);
  std::vector<CellIndex> out;
  for (const auto& [dc, dr] : DiskOffsets(radius)) {
    const int col = c.col + dc;
    const int row = c.row + dr;
    if (!world.contains(col, row)) continue;
    const CellIndex i = world.index(col, row);
    if (IsWalkable(world.cells[i].land_class)) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The set of district worlds a run covers. Cell::district indexes `worlds`.
struct Region {
  std::vector<World> worlds;

  std::optional<std::uint32_t> index_of(std::string_view district_id) const {
    for (std::size_t i = 0; i < worlds.size(); ++i)
      if (worlds[i].district_id == district_id) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  const World& get(std::string_view district_id) const {
    const auto i = index_of(district_id);
    if (!i) Fail(ErrorKind::kConfiguration, "no world for district '" + std::string(district_id) + "'");
    return worlds[*i];
  }

  void add(World w) {
    Require(!index_of(w.district_id), ErrorKind::kConfiguration,
            "duplicate district '" + w.district_id + "'");
    const auto idx = static_cast<std::uint32_t>(worlds.size());
    for (auto& c : w.cells) c.district = idx;
    worlds.push_back(std::move(w));
  }
};

struct LandClassCounts {
  std::size_t residential = 0;
  std::size_t commercial = 0;
  std::size_t traffic = 0;
  std::size_t other = 0;
};

inline LandClassCounts CountClasses(const World& w) {
  LandClassCounts n;
  for (const auto& c : w.cells) {
    switch (c.land_class) {
      case LandClass::kResidential: ++n.residential; break;
      case LandClass::kCommercial: ++n.commercial; break;
      case LandClass::kTraffic: ++n.traffic; break;
      case LandClass::kOther: ++n.other; break;
    }
  }
  return n;
}

inline nlohmann::json WorldManifest(const World& w) {
  const auto n = CountClasses(w);
  std::vector<std::size_t> per_grade;
  for (const auto& c : w.cells) {
    if (c.land_class != LandClass::kResidential) continue;
    if (per_grade.size() < c.price_grade) per_grade.resize(c.price_grade, 0);
    ++per_grade[c.price_grade - 1];
  }
  return {
      {"district", w.district_id},
      {"ncols", w.ncols},
      {"nrows", w.nrows},
      {"cell_size", w.cell_size},
      {"counts",
       {{"residential", n.residential},
        {"commercial", n.commercial},
        {"traffic", n.traffic},
        {"other", n.other}}},
      {"walkable", w.walkable.size()},
      {"roads", n.traffic},
      {"residential_per_grade", per_grade},
      {"warnings", w.warnings},
  };
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_ENVIRONMENT_HPP_
