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


#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "exposure_abm/experiments.hpp"
#include "test_support.hpp"

namespace exposure_abm {
namespace {

using testing::MakeRaster;
using testing::SingleDistrictInputs;

// A 12x12 district with a road cross and a varied price surface.
World SmallWorld(bool roads_as_commercial = false) {
  std::vector<std::vector<std::int64_t>> cover(12, std::vector<std::int64_t>(12, 110));
  std::vector<std::vector<std::int64_t>> grade(12, std::vector<std::int64_t>(12, 1));
  for (int i = 0; i < 12; ++i) {
    cover[5][i] = cover[i][5] = roads_as_commercial ? 120 : 150;
    for (int j = 0; j < 12; ++j) grade[i][j] = 1 + (i + j) % 5;
  }
  cover[0][0] = 120;
  return BuildWorld(MakeRaster(cover), MakeRaster(grade), "d");
}

// Alternating clean and polluted weeks around the threshold.
TickSeries Pulsed(std::size_t ticks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-25.0, 25.0);
  TickSeries s;
  s.district_id = "d";
  for (std::size_t t = 0; t < ticks; ++t)
    s.values.push_back(std::max(0.0, ((t / 14) % 2 ? 110.0 : 60.0) + jitter(rng)));
  return s;
}

ModelInputs SmallInputs(bool roads_as_commercial = false, std::int64_t per_bin = 6) {
  return SingleDistrictInputs(SmallWorld(roads_as_commercial), {Pulsed(400, 3)}, per_bin);
}

RunConfig SmallConfig() {
  RunConfig c;
  c.scenario = PollutionScenario::kBau;
  c.max_ticks = 800;
  c.params.alpha = 0.02;
  c.seed = 11;
  return c;
}

TEST(ParallelForTest, VisitsAllAndRethrowsLowestFailure) {
  std::vector<std::atomic<int>> hits(50);
  ParallelFor(50, 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  try {
    ParallelFor(20, 3, [](std::size_t i) {
      if (i == 7 || i == 13) throw std::runtime_error("job " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "job 7");
  }
}

TEST(ReplicateTest, SingleReplicateEqualsRun) {
  const auto in = SmallInputs();
  const auto cfg = SmallConfig();
  const auto series = ScenarioSeries(in, cfg.scenario);
  const auto s = ReplicateAverage(in, series, cfg.params, 1, 5, cfg.max_ticks);
  const auto r = RunModel(in, series, cfg.params, 5, cfg.max_ticks);
  ASSERT_EQ(s.length(), r.at_risk.size());
  for (std::size_t t = 0; t < s.length(); ++t) {
    EXPECT_EQ(s.mean[t][kAllGroups], r.rate(t));
    EXPECT_EQ(s.min[t], s.max[t]);
  }
  for (std::size_t b = 0; b < kAgeBinCount; ++b)
    EXPECT_EQ(s.mean_admissions[b], static_cast<double>(r.admissions_by_bin[b]));
}

TEST(ReplicateTest, HomogeneousExposureHasZeroEnvelope) {
  // Active agents only, every cell residential and equally polluted: seeds
  // change placements but not exposure.
  World w = BuildWorld(testing::FilledRaster(6, 6, 110), testing::FilledRaster(6, 6, 2), "d");
  ModelInputs in = SingleDistrictInputs(std::move(w), {Pulsed(400, 8)}, 0);
  for (int b = 2; b <= 11; ++b) in.census.districts["d"][static_cast<std::size_t>(b)] = 5;
  HealthParams p;
  p.alpha = 0.03;
  const auto s = ReplicateAverage(in, ScenarioSeries(in, PollutionScenario::kBau), p, 6, 1, 800, 2);
  for (std::size_t t = 0; t < s.length(); ++t) EXPECT_EQ(s.min[t], s.max[t]);
  EXPECT_GT(s.final_mean(), 0.0);
}

TEST(ReplicateTest, EarlyStoppedRunsHoldLastValue) {
  RunResult a, b;
  a.assessed = b.assessed = {0, 0, 0, 2};
  a.at_risk = {{0, 0, 0, 1}, {0, 0, 0, 2}};
  b.at_risk = {{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 2}};
  const auto s = SummarizeReplicates({a, b}, 1);
  ASSERT_EQ(s.length(), 4u);
  EXPECT_DOUBLE_EQ(s.mean[3][kAllGroups], 1.0);
  EXPECT_DOUBLE_EQ(s.mean[2][kAllGroups], 0.75);
  EXPECT_DOUBLE_EQ(s.min[0], 0.0);
  EXPECT_DOUBLE_EQ(s.max[0], 0.5);
}

TEST(ReplicateTest, FailingReplicateNamesSeed) {
  const auto in = SmallInputs();
  std::vector<TickSeries> short_series{testing::ConstantSeries("d", 10, 0.0)};
  try {
    ReplicateAverage(in, short_series, HealthParams{}, 3, 40, 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("seed 40"), std::string::npos) << e.what();
  }
}

TEST(SweepTest, GridShapeAndOrder) {
  const auto in = SmallInputs(false, 2);
  SweepSpec spec;
  spec.base = SmallConfig();
  spec.base.max_ticks = 60;
  spec.replicates = 1;
  const auto cells = OfatSweep(spec, in);
  ASSERT_EQ(cells.size(), 30u);
  EXPECT_EQ(cells[0].road_multiplier, 1.0);
  EXPECT_EQ(cells[9].alpha, 0.01);
  EXPECT_EQ(cells[10].road_multiplier, 1.5);
  const auto text = FormatSweepCsv(cells);
  EXPECT_EQ(text.substr(0, text.find('\n')), "alpha,road,tick,mean_rate,min,max");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 30 * 60);
}

TEST(SweepTest, UnitRoadMultiplierEqualsWorldWithoutRoads) {
  SweepSpec spec;
  spec.base = SmallConfig();
  spec.alpha_grid = {0.02};
  spec.road_grid = {1.0};
  spec.replicates = 3;
  const auto with_roads = OfatSweep(spec, SmallInputs(false));
  const auto without = OfatSweep(spec, SmallInputs(true));
  EXPECT_EQ(FormatSweepCsv(with_roads), FormatSweepCsv(without));
}

TEST(SweepTest, MonotoneInAlphaAndRoad) {
  SweepSpec spec;
  spec.base = SmallConfig();
  spec.alpha_grid = {0.005, 0.01, 0.02, 0.04};
  spec.replicates = 10;
  const auto cells = OfatSweep(spec, SmallInputs(false, 10));
  const std::size_t na = spec.alpha_grid.size();
  const double noise = 0.01;  // a few agents on this small world
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t a = 1; a < na; ++a)
      EXPECT_LE(cells[r * na + a - 1].summary.final_mean(),
                cells[r * na + a].summary.final_mean() + noise);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t r = 1; r < 3; ++r)
      EXPECT_LE(cells[(r - 1) * na + a].summary.final_mean(),
                cells[r * na + a].summary.final_mean() + noise);
  EXPECT_LT(cells[0].summary.final_mean() + 0.1, cells[3 * na - 1].summary.final_mean());
}

TEST(SweepTest, DegenerateGridEqualsSingleRun) {
  const auto in = SmallInputs();
  SweepSpec spec;
  spec.base = SmallConfig();
  spec.alpha_grid = {spec.base.params.alpha};
  spec.road_grid = {spec.base.params.road_multiplier};
  spec.replicates = 1;
  spec.seed_base = spec.base.seed;
  const auto cells = OfatSweep(spec, in);
  const auto r = RunModel(in, ScenarioSeries(in, spec.base.scenario), spec.base.params,
                          spec.base.seed, spec.base.max_ticks);
  ASSERT_EQ(cells.size(), 1u);
  for (std::size_t t = 0; t < r.at_risk.size(); ++t)
    EXPECT_EQ(cells[0].summary.mean[t][kAllGroups], r.rate(t));
}

TEST(SweepTest, ValidationRejectsEmptyGrids) {
  SweepSpec spec;
  spec.alpha_grid.clear();
  EXPECT_THROW(spec.Validate(), Error);
  spec = SweepSpec{};
  spec.replicates = 0;
  EXPECT_THROW(spec.Validate(), Error);
}

TEST(ScenarioTest, MatrixOrderingAndShape) {
  const auto in = SmallInputs(false, 8);
  const auto cells = ScenarioMatrix(SmallConfig(), in, 3);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].label(), "BAU-AC100");
  EXPECT_EQ(cells[1].label(), "BAU-AC200");
  EXPECT_EQ(cells[2].label(), "INC-AC100");
  EXPECT_EQ(cells[3].label(), "INC-AC200");
  for (const auto& c : cells) {
    EXPECT_EQ(c.summary.replicates, 3u);
    for (auto t : c.summary.final_ticks) EXPECT_LE(t, 800u);
  }
  EXPECT_GE(cells[2].summary.final_mean(), cells[0].summary.final_mean());
  EXPECT_GE(cells[3].summary.final_mean(), cells[1].summary.final_mean());
  EXPECT_LE(cells[1].summary.final_mean(), cells[0].summary.final_mean());
  EXPECT_LE(cells[3].summary.final_mean(), cells[2].summary.final_mean());
  const auto text = FormatScenariosCsv(cells);
  EXPECT_EQ(text.substr(0, text.find('\n')), "scenario,ac,tick,group,mean_rate");
}

ObservedPatients ObservedFrom(const ReplicateSummary& s) {
  ObservedPatients o;
  for (int b = 0; b < kAgeBinCount; ++b) o[b] = s.mean_admissions[static_cast<std::size_t>(b)];
  return o;
}

TEST(CalibrationTest, RecoversPlantedParameters) {
  const auto in = SmallInputs(false, 10);
  CalibrationSpec spec;
  spec.base = SmallConfig();
  spec.replicates = 2;
  spec.seed_base = 4;
  spec.alphas = {0.01, 0.02, 0.04};
  spec.eta_grids = {std::vector<double>{1.0, 1.5}, {1.0}, {1.0, 2.0}};
  HealthParams planted = spec.base.params;
  planted.alpha = 0.02;
  planted.eta = {1.5, 1.0, 2.0};
  const auto series = ScenarioSeries(in, spec.base.scenario);
  const auto observed = ObservedFrom(
      ReplicateAverage(in, series, planted, spec.replicates, spec.seed_base, spec.base.max_ticks));
  const auto r = Calibrate(spec, in, observed, 2);
  EXPECT_EQ(r.alpha, 0.02);
  EXPECT_EQ(r.eta, planted.eta);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.candidates_evaluated, 12u);
  EXPECT_EQ(r.objective, L1Objective(r.table));
}

TEST(CalibrationTest, TiesGoToSmallerAlphaThenEta) {
  // Clean air: no admissions for any candidate, so every objective is 0.
  ModelInputs in = SingleDistrictInputs(SmallWorld(), {testing::ConstantSeries("d", 400, 0.0)}, 2);
  CalibrationSpec spec;
  spec.base = SmallConfig();
  spec.replicates = 1;
  spec.alphas = {0.03, 0.01, 0.02};
  spec.eta_grids = {std::vector<double>{2.0, 1.0}, {1.5, 0.5}, {1.0}};
  ObservedPatients observed{{0, 0.0}, {10, 0.0}};
  const auto r = Calibrate(spec, in, observed);
  EXPECT_EQ(r.alpha, 0.01);
  EXPECT_EQ(r.eta, (std::array<double, 3>{1.0, 0.5, 1.0}));
  EXPECT_EQ(r.objective, 0.0);
}

TEST(CalibrationTest, SingleCandidateReturnedWithObjective) {
  const auto in = SmallInputs();
  CalibrationSpec spec;
  spec.base = SmallConfig();
  spec.replicates = 1;
  spec.alphas = {0.02};
  spec.eta_grids = {std::vector<double>{1.0}, {1.0}, {1.0}};
  ObservedPatients observed{{3, 1000.0}};
  const auto r = Calibrate(spec, in, observed);
  EXPECT_EQ(r.alpha, 0.02);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_DOUBLE_EQ(r.objective, std::abs(1000.0 - r.table[0].modelled));
  EXPECT_DOUBLE_EQ(r.table[0].diff, 1000.0 - r.table[0].modelled);
  const auto text = FormatCalibrationCsv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), "age_bin,observed,modelled,diff");
}

TEST(CalibrationTest, NoCompletedCandidateFails) {
  const auto in = SmallInputs();
  CalibrationSpec spec;
  spec.base = SmallConfig();
  spec.replicates = 1;
  spec.alphas = {1.5, 2.0};
  spec.eta_grids = {std::vector<double>{1.0}, {1.0}, {1.0}};
  try {
    Calibrate(spec, in, {{0, 1.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCalibrationFailed);
  }
}

TEST(CalibrationTest, ObservedCsv) {
  const auto o = ParseObservedCsv(csv::ParseText("age_bin,count\n5-9,1.5\n85+,2\n", "o.csv"));
  EXPECT_EQ(o.size(), 2u);
  EXPECT_EQ(o.at(16), 2.0);
  EXPECT_THROW(ParseObservedCsv(csv::ParseText("age_bin,count\n5-9,1\n5-9,2\n", "o")), Error);
  EXPECT_THROW(ParseObservedCsv(csv::ParseText("age_bin,count\n5-9,-1\n", "o")), Error);
}

TEST(SpecParsingTest, SweepAndCalibrationSpecs) {
  testing::TempDir dir("specs");
  const nlohmann::json run = {
      {"schema", kRunConfigSchema},
      {"districts", {{{"id", "d"}, {"land_cover", "c.asc"}, {"land_price", "p.asc"}, {"pm10", "pm.csv"}}}},
      {"census", "census.csv"},
      {"od", "od.csv"},
      {"seed", 9}};
  csv::WriteFile(dir / "run.json", run.dump());

  const auto sweep = ParseSweepSpec(
      {{"schema", kSweepSchema}, {"base_config", "run.json"}, {"road_grid", {1.0, 2.0}}, {"replicates", 4}},
      dir.path());
  EXPECT_EQ(sweep.road_grid, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(sweep.alpha_grid.size(), 10u);
  EXPECT_EQ(sweep.replicates, 4u);
  EXPECT_EQ(sweep.seed_base, 9u);
  EXPECT_EQ(sweep.base.census, dir / "census.csv");
  EXPECT_THROW(ParseSweepSpec({{"schema", kSweepSchema}, {"base_config", "run.json"}, {"extra", 1}},
                              dir.path()),
               Error);
  EXPECT_THROW(ParseSweepSpec({{"schema", "v0"}, {"base_config", "run.json"}}, dir.path()), Error);

  const auto cal = ParseCalibrationSpec({{"schema", kCalibrationSchema},
                                         {"base_config", "run.json"},
                                         {"alphas", {0.1}},
                                         {"eta_grids", {{"old", {1.0, 3.0}}}},
                                         {"seed_base", 2}},
                                        dir.path());
  EXPECT_EQ(cal.eta_grids[2], (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(cal.eta_grids[0], (std::vector<double>{1.0}));
  EXPECT_EQ(cal.seed_base, 2u);
  EXPECT_THROW(ParseCalibrationSpec({{"schema", kCalibrationSchema}, {"base_config", "run.json"}},
                                    dir.path()),
               Error);
}

}  // namespace
}  // namespace exposure_abm
