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

// Experiment harness: replicate averaging, sensitivity sweeps over
// (alpha, road multiplier), the pollution x adaptive-capacity scenario
// matrix, and grid-search calibration against observed admissions.
//
// Replicate i of any experiment runs with seed seed_base + i, so every cell
// of a sweep or scenario matrix sees the same populations and movement
// draws.

#ifndef EXPOSURE_ABM_EXPERIMENTS_HPP_
#define EXPOSURE_ABM_EXPERIMENTS_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "exposure_abm/config.hpp"
#include "exposure_abm/dynamics.hpp"
#include "exposure_abm/error.hpp"

namespace exposure_abm {

// Runs body(0..n-1) on up to `jobs` threads. Failures are collected and the
// one with the lowest index is rethrown after all workers finish.
inline void ParallelFor(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ReplicateSummary {
  std::uint32_t replicates = 0;
  std::uint64_t seed_base = 0;
  std::vector<std::array<double, kGroupCount + 1>> mean;  // per tick, per group
  std::vector<double> min;                                 // overall rate envelope
  std::vector<double> max;
  std::array<double, kAgeBinCount> mean_admissions{};
  std::vector<std::uint32_t> final_ticks;  // per replicate
  std::vector<StopCause> stop_causes;

  std::size_t length() const { return mean.size(); }
  double final_mean(std::size_t group = kAllGroups) const {
    return mean.empty() ? 0.0 : mean.back()[group];
  }
  double final_width() const { return min.empty() ? 0.0 : max.back() - min.back(); }
};

// Per-tick mean of n replicates. A replicate that stopped early holds its
// last recorded rates for the remaining ticks.
inline ReplicateSummary SummarizeReplicates(const std::vector<RunResult>& runs,
                                            std::uint64_t seed_base) {
  ReplicateSummary s;
  s.replicates = static_cast<std::uint32_t>(runs.size());
  s.seed_base = seed_base;
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.at_risk.size());
  s.mean.assign(len, {});
  s.min.assign(len, 1.0);
  s.max.assign(len, 0.0);
  for (const auto& r : runs) {
    s.final_ticks.push_back(r.final_tick);
    s.stop_causes.push_back(r.stop_cause);
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t src = std::min(t, r.at_risk.size() - 1);
      for (std::size_t g = 0; g <= kAllGroups; ++g) s.mean[t][g] += r.rate(src, g);
      const double all = r.rate(src, kAllGroups);
      s.min[t] = std::min(s.min[t], all);
      s.max[t] = std::max(s.max[t], all);
    }
    for (std::size_t b = 0; b < kAgeBinCount; ++b)
      s.mean_admissions[b] += static_cast<double>(r.admissions_by_bin[b]);
  }
  const double n = static_cast<double>(runs.size());
  for (auto& row : s.mean)
    for (auto& v : row) v /= n;
  for (auto& v : s.mean_admissions) v /= n;
  return s;
}

inline ReplicateSummary ReplicateAverage(const ModelInputs& inputs,
                                         const std::vector<TickSeries>& series,
                                         const HealthParams& params, std::uint32_t n,
                                         std::uint64_t seed_base, std::uint32_t max_ticks,
                                         unsigned jobs = 1) {
  Require(n >= 1, ErrorKind::kValidation, "replicate count must be >= 1");
  std::vector<RunResult> runs(n);
  ParallelFor(n, jobs, [&](std::size_t i) {
    const std::uint64_t seed = seed_base + i;
    try {
      runs[i] = RunModel(inputs, series, params, seed, max_ticks);
    } catch (const Error& e) {
      throw Error(e.kind(), "replicate with seed " + std::to_string(seed) + ": " + e.what());
    }
  });
  return SummarizeReplicates(runs, seed_base);
}

// ---------------------------------------------------------------------------
// Sensitivity sweep

inline std::vector<double> DefaultAlphaGrid() {
  std::vector<double> g;
  for (int k = 1; k <= 10; ++k) g.push_back(k / 1000.0);
  return g;
}

struct SweepSpec {
  RunConfig base;
  std::vector<double> alpha_grid = DefaultAlphaGrid();
  std::vector<double> road_grid{1.0, 1.5, 2.0};
  std::uint32_t replicates = 20;
  std::uint64_t seed_base = 1;

  void Validate() const {
    Require(!alpha_grid.empty() && !road_grid.empty(), ErrorKind::kConfiguration,
            "sweep grids must be non-empty");
    Require(replicates >= 1, ErrorKind::kConfiguration, "replicates must be >= 1");
  }
};

inline constexpr std::string_view kSweepSchema = "exposure-abm/sweep/v1";

// base_config is resolved against base_dir, the directory of the spec file.
inline SweepSpec ParseSweepSpec(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  using detail::Get;
  detail::CheckKeys(j, "sweep spec",
                    {"schema", "base_config", "alpha_grid", "road_grid", "replicates", "seed_base"});
  Require(Get<std::string>(j, "schema", "") == kSweepSchema, ErrorKind::kConfiguration,
          "sweep spec schema must be '" + std::string(kSweepSchema) + "'");
  SweepSpec s;
  s.base = LoadRunConfig(detail::Resolve(base_dir, detail::GetString(j, "base_config")));
  s.alpha_grid = Get(j, "alpha_grid", s.alpha_grid);
  s.road_grid = Get(j, "road_grid", s.road_grid);
  s.replicates = Get(j, "replicates", s.replicates);
  s.seed_base = Get(j, "seed_base", s.base.seed);
  s.Validate();
  return s;
}

inline SweepSpec LoadSweepSpec(const std::filesystem::path& path) {
  return ParseSweepSpec(ReadJsonFile(path), path.parent_path());
}

struct SweepCell {
  double alpha = 0.0;
  double road_multiplier = 1.0;
  ReplicateSummary summary;
};

// Cells ordered road-major: (road_grid[0], alpha_grid[0..]), (road_grid[1], ...).
inline std::vector<SweepCell> OfatSweep(const SweepSpec& spec, const ModelInputs& inputs,
                                        unsigned jobs = 1) {
  spec.Validate();
  const auto series = ScenarioSeries(inputs, spec.base.scenario, spec.base.inc_rate);
  std::vector<SweepCell> cells;
  for (double road : spec.road_grid) {
    for (double alpha : spec.alpha_grid) {
      HealthParams p = spec.base.params;
      p.alpha = alpha;
      p.road_multiplier = road;
      cells.push_back({alpha, road,
                       ReplicateAverage(inputs, series, p, spec.replicates, spec.seed_base,
                                        spec.base.max_ticks, jobs)});
    }
  }
  return cells;
}

inline std::string FormatSweepCsv(const std::vector<SweepCell>& cells) {
  std::string out = "alpha,road,tick,mean_rate,min,max\n";
  for (const auto& c : cells) {
    const std::string prefix =
        csv::FormatDouble(c.alpha) + "," + csv::FormatDouble(c.road_multiplier) + ",";
    for (std::size_t t = 0; t < c.summary.length(); ++t) {
      out += prefix + std::to_string(t) + "," + csv::FormatDouble(c.summary.mean[t][kAllGroups]) +
             "," + csv::FormatDouble(c.summary.min[t]) + "," + csv::FormatDouble(c.summary.max[t]) +
             "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario matrix

struct ScenarioCell {
  PollutionScenario pollution = PollutionScenario::kBau;
  double adaptive_capacity = 100.0;
  ReplicateSummary summary;

  std::string label() const {
    return std::string(ToString(pollution)) + "-AC" +
           std::to_string(static_cast<int>(std::lround(adaptive_capacity)));
  }
};

// {BAU, INC} x {AC100, AC200}, in that order.
inline std::vector<ScenarioCell> ScenarioMatrix(const RunConfig& base, const ModelInputs& inputs,
                                                std::uint32_t replicates = 20,
                                                unsigned jobs = 1,
                                                std::vector<double> capacities = {100.0, 200.0}) {
  std::vector<ScenarioCell> cells;
  for (auto pollution : {PollutionScenario::kBau, PollutionScenario::kInc}) {
    const auto series = ScenarioSeries(inputs, pollution, base.inc_rate);
    for (double ac : capacities) {
      HealthParams p = base.params;
      p.adaptive_capacity = ac;
      cells.push_back({pollution, ac,
                       ReplicateAverage(inputs, series, p, replicates, base.seed, base.max_ticks,
                                        jobs)});
    }
  }
  return cells;
}

inline std::string FormatScenariosCsv(const std::vector<ScenarioCell>& cells) {
  std::string out = "scenario,ac,tick,group,mean_rate\n";
  for (const auto& c : cells) {
    const std::string prefix = std::string(ToString(c.pollution)) + "," +
                               csv::FormatDouble(c.adaptive_capacity) + ",";
    for (std::size_t t = 0; t < c.summary.length(); ++t)
      for (std::size_t g = 0; g <= kAllGroups; ++g)
        out += prefix + std::to_string(t) + "," + std::string(GroupColumnName(g)) + "," +
               csv::FormatDouble(c.summary.mean[t][g]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

// Patient counts per age bin, already scaled to the sampled population.
using ObservedPatients = std::map<int, double>;

inline ObservedPatients ParseObservedCsv(const csv::Table& table) {
  const auto b_col = table.RequireColumn("age_bin");
  const auto c_col = table.RequireColumn("count");
  ObservedPatients obs;
  for (const auto& row : table.rows) {
    const auto where = csv::Where(table, row);
    const auto bin = AgeBinFromLabel(row.fields[b_col]);
    if (!bin) Fail(ErrorKind::kParse, where + ": unknown age bin '" + row.fields[b_col] + "'");
    const double count = csv::ParseDouble(row.fields[c_col], where);
    Require(std::isfinite(count) && count >= 0.0, ErrorKind::kValidation,
            where + ": patient counts must be non-negative");
    Require(!obs.count(*bin), ErrorKind::kValidation, where + ": duplicate age bin");
    obs[*bin] = count;
  }
  return obs;
}

inline ObservedPatients ReadObservedCsv(const std::filesystem::path& path) {
  return ParseObservedCsv(csv::ReadFileTable(path));
}

struct CalibrationSpec {
  RunConfig base;
  std::vector<double> alphas;
  std::array<std::vector<double>, kGroupCount> eta_grids;  // young, active, old
  std::uint32_t replicates = 20;
  std::uint64_t seed_base = 1;
};

inline constexpr std::string_view kCalibrationSchema = "exposure-abm/calibration/v1";

inline CalibrationSpec ParseCalibrationSpec(const nlohmann::json& j,
                                            const std::filesystem::path& base_dir) {
  using detail::Get;
  detail::CheckKeys(j, "calibration spec",
                    {"schema", "base_config", "alphas", "eta_grids", "replicates", "seed_base"});
  Require(Get<std::string>(j, "schema", "") == kCalibrationSchema, ErrorKind::kConfiguration,
          "calibration spec schema must be '" + std::string(kCalibrationSchema) + "'");
  CalibrationSpec s;
  s.base = LoadRunConfig(detail::Resolve(base_dir, detail::GetString(j, "base_config")));
  s.alphas = Get<std::vector<double>>(j, "alphas", {});
  if (j.contains("eta_grids")) {
    const auto& g = j.at("eta_grids");
    detail::CheckKeys(g, "eta_grids", {"young", "active", "old"});
    for (std::size_t k = 0; k < kGroupCount; ++k) {
      const std::string name(ToString(static_cast<AgeGroup>(k)));
      s.eta_grids[k] = Get<std::vector<double>>(g, name, {1.0});
    }
  } else {
    for (auto& grid : s.eta_grids) grid = {1.0};
  }
  s.replicates = Get(j, "replicates", s.replicates);
  Require(s.replicates >= 1, ErrorKind::kConfiguration, "replicates must be >= 1");
  s.seed_base = Get(j, "seed_base", s.base.seed);
  Require(!s.alphas.empty(), ErrorKind::kConfiguration, "calibration needs candidate alphas");
  return s;
}

inline CalibrationSpec LoadCalibrationSpec(const std::filesystem::path& path) {
  return ParseCalibrationSpec(ReadJsonFile(path), path.parent_path());
}

struct CalibrationRow {
  int age_bin = 0;
  double observed = 0.0;
  double modelled = 0.0;
  double diff = 0.0;  // observed - modelled
};

struct CalibrationResult {
  double alpha = 0.0;
  std::array<double, kGroupCount> eta{};
  double objective = 0.0;  // sum of |diff|
  std::vector<CalibrationRow> table;
  std::size_t candidates_evaluated = 0;
};

inline std::vector<CalibrationRow> CompareAdmissions(const ReplicateSummary& s,
                                                     const ObservedPatients& observed) {
  std::vector<CalibrationRow> rows;
  for (const auto& [bin, obs] : observed) {
    const double mod = s.mean_admissions[static_cast<std::size_t>(bin)];
    rows.push_back({bin, obs, mod, obs - mod});
  }
  return rows;
}

inline double L1Objective(const std::vector<CalibrationRow>& rows) {
  double sum = 0.0;
  for (const auto& r : rows) sum += std::abs(r.observed - r.modelled);
  return sum;
}

// Exhaustive grid search minimising the L1 distance between mean modelled
// admissions and observed patients per age bin. Ties go to the smaller
// alpha, then the lexicographically smaller (young, active, old) eta.
inline CalibrationResult Calibrate(const CalibrationSpec& spec, const ModelInputs& inputs,
                                   const ObservedPatients& observed, unsigned jobs = 1) {
  Require(!spec.alphas.empty(), ErrorKind::kConfiguration, "no candidate alphas");
  for (const auto& g : spec.eta_grids)
    Require(!g.empty(), ErrorKind::kConfiguration, "every eta grid needs a candidate");
  Require(!observed.empty(), ErrorKind::kConfiguration, "observed patient table is empty");

  struct Candidate {
    double alpha;
    std::array<double, kGroupCount> eta;
  };
  std::vector<Candidate> candidates;
  for (double a : spec.alphas)
    for (double y : spec.eta_grids[0])
      for (double m : spec.eta_grids[1])
        for (double o : spec.eta_grids[2]) candidates.push_back({a, {y, m, o}});

  const auto series = ScenarioSeries(inputs, spec.base.scenario, spec.base.inc_rate);
  std::vector<std::optional<CalibrationResult>> outcomes(candidates.size());
  ParallelFor(candidates.size(), jobs, [&](std::size_t i) {
    HealthParams p = spec.base.params;
    p.alpha = candidates[i].alpha;
    p.eta = candidates[i].eta;
    try {
      const auto s = ReplicateAverage(inputs, series, p, spec.replicates, spec.seed_base,
                                      spec.base.max_ticks, 1);
      CalibrationResult r;
      r.alpha = p.alpha;
      r.eta = p.eta;
      r.table = CompareAdmissions(s, observed);
      r.objective = L1Objective(r.table);
      outcomes[i] = std::move(r);
    } catch (const Error&) {
      // Candidate could not be run (e.g. invalid parameter); skip it.
    }
  });

  std::optional<CalibrationResult> best;
  std::size_t evaluated = 0;
  for (auto& o : outcomes) {
    if (!o) continue;
    ++evaluated;
    const bool better =
        !best || o->objective < best->objective ||
        (o->objective == best->objective &&
         (o->alpha < best->alpha || (o->alpha == best->alpha && o->eta < best->eta)));
    if (better) best = std::move(*o);
  }
  if (!best) Fail(ErrorKind::kCalibrationFailed, "no calibration candidate completed");
  best->candidates_evaluated = evaluated;
  return *best;
}

inline std::string FormatCalibrationCsv(const CalibrationResult& r) {
  std::string out = "age_bin,observed,modelled,diff\n";
  for (const auto& row : r.table)
    out += AgeBinLabel(row.age_bin) + "," + csv::FormatDouble(row.observed) + "," +
           csv::FormatDouble(row.modelled) + "," + csv::FormatDouble(row.diff) + "\n";
  return out;
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_EXPERIMENTS_HPP_
