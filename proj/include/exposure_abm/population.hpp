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

// Synthetic population: sampled agents with 5-year age bins, home cells on
// residential land and work cells drawn through the origin-destination matrix.

#ifndef EXPOSURE_ABM_POPULATION_HPP_
#define EXPOSURE_ABM_POPULATION_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/csv.hpp"
#include "exposure_abm/environment.hpp"
#include "exposure_abm/error.hpp"
#include "exposure_abm/rng.hpp"

namespace exposure_abm {

enum class AgeGroup : std::uint8_t { kYoung = 0, kActive = 1, kOld = 2 };
inline constexpr std::size_t kGroupCount = 3;

constexpr std::string_view ToString(AgeGroup g) {
  switch (g) {
    case AgeGroup::kYoung: return "young";
    case AgeGroup::kActive: return "active";
    case AgeGroup::kOld: return "old";
  }
  return "?";
}

inline std::optional<AgeGroup> AgeGroupFromString(std::string_view s) {
  if (s == "young") return AgeGroup::kYoung;
  if (s == "active") return AgeGroup::kActive;
  if (s == "old") return AgeGroup::kOld;
  return std::nullopt;
}

// Under 15 young, 15-64 active, 65 and over old.
constexpr AgeGroup GroupOf(int age) {
  if (age < 15) return AgeGroup::kYoung;
  if (age < 65) return AgeGroup::kActive;
  return AgeGroup::kOld;
}

// Census bins 5-9, 10-14, ..., 80-84, 85+. Under-fives are not modelled.
inline constexpr int kAgeBinCount = 17;
inline constexpr int kFirstBinAge = 5;
inline constexpr int kBinWidth = 5;

inline std::string AgeBinLabel(int bin) {
  const int lo = kFirstBinAge + kBinWidth * bin;
  if (bin == kAgeBinCount - 1) return std::to_string(lo) + "+";
  return std::to_string(lo) + "-" + std::to_string(lo + kBinWidth - 1);
}

// Accepts "5-9", "05-09", "85+" and "85-89" (the open bin).
inline std::optional<int> AgeBinFromLabel(std::string_view label) {
  auto num = [](std::string_view s) -> std::optional<int> {
    if (s.empty()) return std::nullopt;
    int v = 0;
    for (char ch : s) {
      if (ch < '0' || ch > '9') return std::nullopt;
      v = v * 10 + (ch - '0');
    }
    return v;
  };
  int lo = 0;
  if (!label.empty() && label.back() == '+') {
    auto v = num(label.substr(0, label.size() - 1));
    if (!v) return std::nullopt;
    lo = *v;
  } else {
    const auto dash = label.find('-');
    if (dash == std::string_view::npos) return std::nullopt;
    auto a = num(label.substr(0, dash));
    auto b = num(label.substr(dash + 1));
    if (!a || !b || *b != *a + kBinWidth - 1) return std::nullopt;
    lo = *a;
  }
  if (lo < kFirstBinAge || (lo - kFirstBinAge) % kBinWidth != 0) return std::nullopt;
  const int bin = (lo - kFirstBinAge) / kBinWidth;
  if (bin >= kAgeBinCount) return std::nullopt;
  if (label.back() == '+' && bin != kAgeBinCount - 1) return std::nullopt;
  return bin;
}

constexpr int AgeBinOf(int age) {
  if (age < kFirstBinAge) return -1;
  const int bin = (age - kFirstBinAge) / kBinWidth;
  return bin >= kAgeBinCount ? kAgeBinCount - 1 : bin;
}

using BinCounts = std::array<std::int64_t, kAgeBinCount>;

struct CensusTable {
  std::map<std::string, BinCounts> districts;  // sorted by district id

  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& [_, bins] : districts)
      for (auto c : bins) n += c;
    return n;
  }
};

struct ODMatrix {
  std::map<std::string, std::map<std::string, double>> trips;  // origin -> dest -> trips/day

  double row_total(const std::string& origin) const {
    const auto it = trips.find(origin);
    if (it == trips.end()) return 0.0;
    double s = 0.0;
    for (const auto& [_, t] : it->second) s += t;
    return s;
  }
};

struct AgentSpec {
  std::uint32_t id = 0;
  std::string home_district;
  int age = 0;
  int age_bin = 0;
  AgeGroup group = AgeGroup::kActive;
  CellIndex home_cell = 0;
  std::string work_district;        // empty unless the agent has a fixed work cell
  std::optional<CellIndex> work_cell;
  bool cross_district = false;      // excluded from at-risk assessment
};

// Draws round(count * rate) agents per district and bin, rounding the
// fractional part stochastically; ages are uniform within the bin.
inline std::vector<AgentSpec> Synthesize(const CensusTable& census, double rate,
                                         std::uint64_t seed) {
  Require(rate > 0.0 && rate <= 1.0, ErrorKind::kValidation, "sample rate must be in (0, 1]");
  Require(!census.districts.empty(), ErrorKind::kValidation, "census is empty");
  Rng rng = MakeRng(seed, Stream::kSynthesis);
  std::vector<AgentSpec> agents;
  std::uint32_t next_id = 0;
  for (const auto& [district, bins] : census.districts) {
    for (int bin = 0; bin < kAgeBinCount; ++bin) {
      const std::int64_t count = bins[static_cast<std::size_t>(bin)];
      Require(count >= 0, ErrorKind::kValidation, "census counts must be non-negative");
      const double expected = static_cast<double>(count) * rate;
      double whole = std::floor(expected);
      double frac = expected - whole;
      if (std::abs(expected - std::round(expected)) < 1e-9) {
        whole = std::round(expected);
        frac = 0.0;
      }
      auto n = static_cast<std::int64_t>(whole);
      if (frac > 0.0 && Uniform01(rng) < frac) ++n;
      const int lo = kFirstBinAge + kBinWidth * bin;
      for (std::int64_t k = 0; k < n; ++k) {
        AgentSpec a;
        a.id = next_id++;
        a.home_district = district;
        a.age = lo + static_cast<int>(UniformIndex(rng, kBinWidth));
        a.age_bin = bin;
        a.group = GroupOf(a.age);
        agents.push_back(std::move(a));
      }
    }
  }
  return agents;
}

// Homes uniform over residential cells of the home district. Active agents
// pick a destination district in proportion to the OD row of their home
// district and a work cell uniformly among its walkable cells.
inline void AssignLocations(std::vector<AgentSpec>& agents, const Region& region,
                            const ODMatrix& od, std::uint64_t seed) {
  struct Destinations {
    std::vector<std::string> ids;
    std::discrete_distribution<std::size_t> pick;
  };
  std::map<std::string, Destinations> rows;
  for (const auto& a : agents) {
    if (rows.count(a.home_district)) continue;
    const World& home = region.get(a.home_district);
    Require(!home.residential.empty(), ErrorKind::kValidation,
            a.home_district + ": world has no residential cells");
    Destinations d;
    std::vector<double> weights;
    if (auto it = od.trips.find(a.home_district); it != od.trips.end()) {
      for (const auto& [dest, trips] : it->second) {
        Require(std::isfinite(trips) && trips >= 0.0, ErrorKind::kConfiguration,
                "OD trips must be finite and non-negative");
        if (trips <= 0.0) continue;
        const World& w = region.get(dest);
        Require(!w.walkable.empty(), ErrorKind::kConfiguration,
                dest + ": destination district has no walkable cells");
        d.ids.push_back(dest);
        weights.push_back(trips);
      }
    }
    Require(!weights.empty(), ErrorKind::kConfiguration,
            "OD row for populated district '" + a.home_district + "' is all zero");
    d.pick = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    rows.emplace(a.home_district, std::move(d));
  }

  Rng rng = MakeRng(seed, Stream::kPlacement);
  for (auto& a : agents) {
    const World& home = region.get(a.home_district);
    a.home_cell = home.residential[UniformIndex(rng, home.residential.size())];
    a.work_cell.reset();
    a.work_district.clear();
    a.cross_district = false;
    if (a.group != AgeGroup::kActive) continue;
    auto& dest = rows.at(a.home_district);
    const std::string& dest_id = dest.ids[dest.pick(rng)];
    const World& work = region.get(dest_id);
    a.work_district = dest_id;
    a.work_cell = work.walkable[UniformIndex(rng, work.walkable.size())];
    a.cross_district = dest_id != a.home_district;
  }
}

// ---------------------------------------------------------------------------
// CSV I/O

inline CensusTable ParseCensusCsv(const csv::Table& table) {
  const auto d_col = table.RequireColumn("district");
  const auto b_col = table.RequireColumn("age_bin");
  const auto c_col = table.RequireColumn("count");
  CensusTable census;
  for (const auto& row : table.rows) {
    const auto where = csv::Where(table, row);
    const auto bin = AgeBinFromLabel(row.fields[b_col]);
    if (!bin) Fail(ErrorKind::kParse, where + ": unknown age bin '" + row.fields[b_col] + "'");
    const auto count = csv::ParseInt(row.fields[c_col], where);
    Require(count >= 0, ErrorKind::kValidation, where + ": negative census count");
    auto& bins = census.districts[row.fields[d_col]];
    bins[static_cast<std::size_t>(*bin)] += count;
  }
  return census;
}

inline CensusTable ReadCensusCsv(const std::filesystem::path& path) {
  return ParseCensusCsv(csv::ReadFileTable(path));
}

inline ODMatrix ParseOdCsv(const csv::Table& table) {
  const auto o_col = table.RequireColumn("origin");
  const auto d_col = table.RequireColumn("destination");
  const auto t_col = table.RequireColumn("trips");
  ODMatrix od;
  for (const auto& row : table.rows) {
    const auto where = csv::Where(table, row);
    const double trips = csv::ParseDouble(row.fields[t_col], where);
    Require(std::isfinite(trips) && trips >= 0.0, ErrorKind::kValidation,
            where + ": trips must be finite and non-negative");
    od.trips[row.fields[o_col]][row.fields[d_col]] += trips;
  }
  return od;
}

inline ODMatrix ReadOdCsv(const std::filesystem::path& path) {
  return ParseOdCsv(csv::ReadFileTable(path));
}

inline std::string FormatAgentsCsv(const std::vector<AgentSpec>& agents, const Region& region) {
  std::string out =
      "id,district,age,age_bin,group,home_col,home_row,work_district,work_col,work_row,"
      "cross_district\n";
  for (const auto& a : agents) {
    const Cell& home = region.get(a.home_district).cells.at(a.home_cell);
    out += std::to_string(a.id) + "," + a.home_district + "," + std::to_string(a.age) + "," +
           AgeBinLabel(a.age_bin) + "," + std::string(ToString(a.group)) + "," +
           std::to_string(home.col) + "," + std::to_string(home.row) + ",";
    if (a.work_cell) {
      const Cell& work = region.get(a.work_district).cells.at(*a.work_cell);
      out += a.work_district + "," + std::to_string(work.col) + "," + std::to_string(work.row);
    } else {
      out += ",,";
    }
    out += a.cross_district ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_POPULATION_HPP_
