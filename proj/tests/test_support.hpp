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


// Small in-memory worlds, populations and series shared by the test suites.

#ifndef EXPOSURE_ABM_TESTS_TEST_SUPPORT_HPP_
#define EXPOSURE_ABM_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "exposure_abm/config.hpp"
#include "exposure_abm/environment.hpp"
#include "exposure_abm/pollution.hpp"
#include "exposure_abm/population.hpp"
#include "exposure_abm/raster.hpp"

namespace exposure_abm::testing {

inline Raster MakeRaster(const std::vector<std::vector<std::int64_t>>& rows) {
  Raster r;
  r.nrows = static_cast<int>(rows.size());
  r.ncols = static_cast<int>(rows.front().size());
  for (const auto& row : rows)
    for (auto v : row) r.cells.emplace_back(v);
  return r;
}

inline Raster FilledRaster(int ncols, int nrows, std::int64_t value) {
  return MakeRaster(std::vector<std::vector<std::int64_t>>(
      static_cast<std::size_t>(nrows), std::vector<std::int64_t>(static_cast<std::size_t>(ncols), value)));
}

// An n x n world of one land class, every cell at the given price grade.
inline World UniformWorld(const std::string& id, int n, std::int64_t land_code = 110,
                          std::int64_t grade = 1) {
  return BuildWorld(FilledRaster(n, n, land_code), FilledRaster(n, n, grade), id);
}

inline TickSeries ConstantSeries(const std::string& id, std::size_t ticks, double value) {
  TickSeries s;
  s.district_id = id;
  s.values.assign(ticks, value);
  return s;
}

// Agents of one age placed by hand.
inline AgentSpec MakeAgent(std::uint32_t id, const std::string& district, int age,
                           CellIndex home, std::optional<CellIndex> work = std::nullopt) {
  AgentSpec a;
  a.id = id;
  a.home_district = district;
  a.age = age;
  a.age_bin = AgeBinOf(age);
  a.group = GroupOf(age);
  a.home_cell = home;
  if (work) {
    a.work_district = district;
    a.work_cell = work;
  }
  return a;
}

inline HealthParams NoRecovery(double alpha = 0.0043) {
  HealthParams p;
  p.alpha = alpha;
  p.recovery = RecoveryTable::Zero();
  return p;
}

// Model inputs for one district with a uniform census (agents_per_bin in
// every bin at rate 1) and self-commuting OD.
inline ModelInputs SingleDistrictInputs(World world, std::vector<TickSeries> observed,
                                        std::int64_t agents_per_bin) {
  ModelInputs in;
  const std::string id = world.district_id;
  in.region.add(std::move(world));
  BinCounts bins{};
  bins.fill(agents_per_bin);
  in.census.districts[id] = bins;
  in.od.trips[id][id] = 1.0;
  in.sample_rate = 1.0;
  in.observed = std::move(observed);
  const std::size_t days = in.observed.front().size() / 2;
  in.calendar = SeasonCalendar::Build(
      std::chrono::sys_days{std::chrono::year{2010} / std::chrono::January / 1}, days, 2);
  return in;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("exposure_abm_" + tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace exposure_abm::testing

#endif  // EXPOSURE_ABM_TESTS_TEST_SUPPORT_HPP_
