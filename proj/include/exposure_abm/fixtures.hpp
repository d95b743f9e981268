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

// Synthetic two-district inputs shaped like the real ones (rasters, hourly
// station PM10 with gaps, census, OD matrix) so the full pipeline runs
// without licensed data. Nothing here is calibrated to a real city.

#ifndef EXPOSURE_ABM_FIXTURES_HPP_
#define EXPOSURE_ABM_FIXTURES_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "exposure_abm/config.hpp"
#include "exposure_abm/csv.hpp"
#include "exposure_abm/environment.hpp"
#include "exposure_abm/experiments.hpp"
#include "exposure_abm/pollution.hpp"
#include "exposure_abm/population.hpp"
#include "exposure_abm/raster.hpp"
#include "exposure_abm/rng.hpp"
#include "json.hpp"

namespace exposure_abm::fixtures {

struct FixtureOptions {
  int grid_size = 100;               // cells per side, 10..100
  std::uint32_t target_agents = 10000;  // at the default 5% sample
  std::uint64_t seed = 20100101;
  bool write_observed = true;        // run the model to produce observed_patients.csv
};

// Roads on every 10th row and column, the rest in 5x5 blocks of residential,
// commercial or other land.
inline Raster LandCover(int size, Rng& rng) {
  Raster r;
  r.ncols = r.nrows = size;
  r.xll = 200000.0;
  r.yll = 540000.0;
  r.cellsize = kNominalCellSize;
  r.nodata = -9999;
  r.cells.resize(static_cast<std::size_t>(size) * size);
  const int blocks = (size + 4) / 5;
  std::vector<std::int64_t> block_class(static_cast<std::size_t>(blocks) * blocks);
  for (auto& c : block_class) {
    const double u = Uniform01(rng);
    c = u < 0.70 ? 110 : u < 0.88 ? 120 : 200;
  }
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      auto& cell = r.cells[static_cast<std::size_t>(row) * size + col];
      if (row % 10 == 5 || col % 10 == 5) {
        cell = 150;
      } else {
        const auto c = block_class[static_cast<std::size_t>(row / 5) * blocks + col / 5];
        cell = c == 200 && (row + col) % 7 == 0 ? std::optional<std::int64_t>{} : c;
      }
    }
  }
  // Guarantee at least one residential cell even on tiny grids.
  r.cells[0] = 110;
  return r;
}

// Raw land prices (won per m2) rising west to east, with noise.
inline Raster LandPrice(const Raster& cover, Rng& rng) {
  Raster r = cover;
  std::normal_distribution<double> noise(0.0, 350000.0);
  for (int row = 0; row < r.nrows; ++row) {
    for (int col = 0; col < r.ncols; ++col) {
      auto& cell = r.cells[static_cast<std::size_t>(row) * r.ncols + col];
      const auto cls = LandClassFromCode(cover.at(col, row));
      if (cls == LandClass::kOther) {
        cell.reset();
        continue;
      }
      const double price = 2.5e6 + 4.0e6 * col / r.ncols + noise(rng);
      cell = static_cast<std::int64_t>(std::max(5e5, std::round(price / 1000.0) * 1000.0));
    }
  }
  return r;
}

// Land-price grades 1..5 in horizontal bands, nudged at random.
inline Raster LandGrade(const Raster& cover, Rng& rng) {
  Raster r = cover;
  for (int row = 0; row < r.nrows; ++row) {
    for (int col = 0; col < r.ncols; ++col) {
      auto& cell = r.cells[static_cast<std::size_t>(row) * r.ncols + col];
      if (LandClassFromCode(cover.at(col, row)) == LandClass::kOther) {
        cell.reset();
        continue;
      }
      int g = 1 + (row * 5) / r.nrows;
      const double u = Uniform01(rng);
      if (u < 0.1 && g > 1) --g;
      else if (u > 0.9 && g < 5) ++g;
      cell = g;
    }
  }
  return r;
}

inline double MonthOffset(unsigned month) {
  // log-scale seasonal shift: winter and the spring dust season are high.
  static constexpr double kOffset[12] = {0.28, 0.30, 0.38, 0.34, 0.18, -0.10,
                                         -0.42, -0.45, -0.25, 0.00, 0.12, 0.22};
  return kOffset[month - 1];
}

inline double HourOffset(int hour) {
  return 0.08 * std::sin((hour - 8) * 3.141592653589793 / 12.0);
}

// Hourly PM10 from 2010-01-01 00:00 for `days` days: log-normal AR(1) around
// a seasonal and diurnal mean, rounded to whole ug/m3. About 2.15% of hours
// go missing in short runs, plus an optional week-long station outage.
inline HourlySeries HourlyPm10(std::string district, std::size_t days, double log_mean,
                               bool outage, Rng& rng) {
  using namespace std::chrono;
  HourlySeries s;
  s.district_id = std::move(district);
  s.start = Hour{sys_days{year{2010} / January / 1}};
  const std::size_t n = 24 * days;
  s.values.resize(n);
  std::normal_distribution<double> z(0.0, 1.0);
  constexpr double kPhi = 0.985;
  constexpr double kSd = 0.45;
  const double innovation = kSd * std::sqrt(1.0 - kPhi * kPhi);
  double x = kSd * z(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const auto day = floor<std::chrono::days>(s.start + hours{static_cast<long>(i)});
    const year_month_day ymd{day};
    x = kPhi * x + innovation * z(rng);
    const double v = std::exp(log_mean + MonthOffset(static_cast<unsigned>(ymd.month())) +
                              HourOffset(static_cast<int>(i % 24)) + x);
    s.values[i] = std::round(v);
  }
  const std::size_t target = static_cast<std::size_t>(std::round(0.0215 * n));
  std::size_t missing = 0;
  while (missing < target) {
    const std::size_t at = UniformIndex(rng, n);
    const std::size_t len = 1 + UniformIndex(rng, 6);
    for (std::size_t i = at; i < std::min(n, at + len) && missing < target; ++i) {
      if (s.values[i]) {
        s.values[i].reset();
        ++missing;
      }
    }
  }
  if (outage && n > 24 * 400) {
    const std::size_t at = 24 * 300 + 10;
    for (std::size_t i = at; i < at + 200; ++i) s.values[i].reset();
  }
  return s;
}

// Relative population weights of the bins 5-9 ... 85+.
inline constexpr double kAgeShape[kAgeBinCount] = {4.2, 4.6, 6.0, 7.4, 8.2, 8.6, 8.8, 8.8, 8.4,
                                                   8.0, 7.0, 5.6, 4.4, 3.6, 2.6, 1.6, 1.2};

inline std::string CensusCsv(const std::vector<std::string>& districts, double per_district) {
  double total_w = 0.0;
  for (double w : kAgeShape) total_w += w;
  std::string out = "district,age_bin,count\n";
  for (const auto& d : districts)
    for (int b = 0; b < kAgeBinCount; ++b)
      out += d + "," + AgeBinLabel(b) + "," +
             std::to_string(static_cast<std::int64_t>(
                 std::round(per_district * kAgeShape[b] / total_w))) +
             "\n";
  return out;
}

struct FixtureFiles {
  std::filesystem::path config;
  std::filesystem::path sweep;
  std::filesystem::path calibration;
  std::filesystem::path observed;
  std::vector<std::filesystem::path> all;
};

inline nlohmann::json FixtureParams() {
  HealthParams p;
  p.alpha = 0.0043;
  p.eta = {1.2, 1.0, 1.4};
  p.adaptive_capacity = 100.0;
  p.road_multiplier = 1.5;
  return ToJson(p);
}

inline FixtureFiles Generate(const std::filesystem::path& out_dir, const FixtureOptions& opt) {
  Require(opt.grid_size >= 10 && opt.grid_size <= 100, ErrorKind::kConfiguration,
          "fixture grid size must be 10..100");
  Require(opt.target_agents >= 1, ErrorKind::kConfiguration, "fixture needs agents");
  std::filesystem::create_directories(out_dir);
  FixtureFiles files;
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    csv::WriteFile(path, content);
    files.all.push_back(path);
    return path;
  };

  Rng rng = MakeRng(opt.seed, Stream::kFixtures);
  const std::size_t days = 2191;  // 2010-01-01 .. 2015-12-31

  const Raster gn_cover = LandCover(opt.grid_size, rng);
  write("gangnam_landcover.asc", FormatRaster(gn_cover));
  write("gangnam_landprice.asc", FormatRaster(LandPrice(gn_cover, rng)));
  write("gangnam_pm10.csv", FormatHourlyCsv(HourlyPm10("gangnam", days, std::log(46.0), true, rng)));

  const Raster gw_cover = LandCover(opt.grid_size, rng);
  write("gwanak_landcover.asc", FormatRaster(gw_cover));
  write("gwanak_landgrade.asc", FormatRaster(LandGrade(gw_cover, rng)));
  write("gwanak_pm10.csv", FormatHourlyCsv(HourlyPm10("gwanak", days, std::log(49.0), false, rng)));

  const double per_district = opt.target_agents / 0.05 / 2.0;
  write("census.csv", CensusCsv({"gangnam", "gwanak"}, per_district));
  write("od.csv",
        "origin,destination,trips\n"
        "gangnam,gangnam,85000\n"
        "gangnam,gwanak,15000\n"
        "gwanak,gwanak,75000\n"
        "gwanak,gangnam,25000\n");

  const nlohmann::json config = {
      {"schema", kRunConfigSchema},
      {"districts",
       {{{"id", "gangnam"},
         {"land_cover", "gangnam_landcover.asc"},
         {"land_price", "gangnam_landprice.asc"},
         {"price_kind", "price"},
         {"pm10", "gangnam_pm10.csv"},
         {"pm10_format", "hourly"}},
        {{"id", "gwanak"},
         {"land_cover", "gwanak_landcover.asc"},
         {"land_price", "gwanak_landgrade.asc"},
         {"price_kind", "grade"},
         {"pm10", "gwanak_pm10.csv"},
         {"pm10_format", "hourly"}}}},
      {"census", "census.csv"},
      {"od", "od.csv"},
      {"sample_rate", 0.05},
      {"price_grades", 5},
      {"scenario", "BAU"},
      {"inc_rate", 0.03},
      {"observed_start", "2010-01-01"},
      {"params", FixtureParams()},
      {"seed", 1},
      {"max_ticks", kDefaultMaxTicks},
  };
  files.config = write("config.json", config.dump(2) + "\n");

  const nlohmann::json sweep = {
      {"schema", kSweepSchema},
      {"base_config", "config.json"},
      {"alpha_grid", DefaultAlphaGrid()},
      {"road_grid", {1.0, 1.5, 2.0}},
      {"replicates", 20},
      {"seed_base", 1},
  };
  files.sweep = write("sweep.json", sweep.dump(2) + "\n");

  const nlohmann::json calibration = {
      {"schema", kCalibrationSchema},
      {"base_config", "config.json"},
      {"alphas", {0.003, 0.0043, 0.006}},
      {"eta_grids", {{"young", {1.0, 1.2}}, {"active", {1.0}}, {"old", {1.0, 1.4}}}},
      {"replicates", 2},
      {"seed_base", 1},
  };
  files.calibration = write("calibration.json", calibration.dump(2) + "\n");

  if (opt.write_observed) {
    // Synthetic "observed" patients: the model's own admissions at the
    // fixture parameters, so calibrating the fixture recovers them.
    const auto cfg = LoadRunConfig(files.config);
    const auto inputs = LoadInputs(cfg);
    const auto series = ScenarioSeries(inputs, cfg.scenario, cfg.inc_rate);
    const auto s = ReplicateAverage(inputs, series, cfg.params, calibration["replicates"], 1,
                                    cfg.max_ticks);
    std::string out = "age_bin,count\n";
    for (int b = 0; b < kAgeBinCount; ++b)
      out += AgeBinLabel(b) + "," + csv::FormatDouble(s.mean_admissions[static_cast<std::size_t>(b)]) +
             "\n";
    files.observed = write("observed_patients.csv", out);
  }
  return files;
}

}  // namespace exposure_abm::fixtures

#endif  // EXPOSURE_ABM_FIXTURES_HPP_
