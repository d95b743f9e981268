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


// Acceptance checks on synthetic fixtures. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "exposure_abm/checksum.hpp"
#include "exposure_abm/cli.hpp"
#include "exposure_abm/experiments.hpp"
#include "exposure_abm/fixtures.hpp"
#include "test_support.hpp"

namespace exposure_abm {
namespace {

namespace fs = std::filesystem;
using testing::ConstantSeries;
using testing::MakeAgent;
using testing::TempDir;
using testing::UniformWorld;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned Jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// Shared 10k-agent fixture.
struct Fixture {
  TempDir dir{"acceptance"};
  fixtures::FixtureFiles files;
  RunConfig config;
  ModelInputs inputs;

  Fixture() {
    fixtures::FixtureOptions opt;
    opt.write_observed = false;
    files = fixtures::Generate(dir.path(), opt);
    config = LoadRunConfig(files.config);
    inputs = LoadInputs(config);
  }

  std::vector<TickSeries> Constant(std::size_t ticks, double value) const {
    std::vector<TickSeries> out;
    for (const auto& w : inputs.region.worlds) out.push_back(ConstantSeries(w.district_id, ticks, value));
    return out;
  }
};

// First tick t with 300 - (1 + a)^t < 100.
std::uint32_t ClosedFormStop(double a) {
  std::uint32_t t = 0;
  while (std::pow(1.0 + a, static_cast<double>(t)) <= 200.0) ++t;
  return t;
}

Verdict ClosedForm() {
  const auto start = Clock::now();
  Region region;
  region.add(UniformWorld("d", 3));
  const std::vector<TickSeries> series{ConstantSeries("d", kDefaultMaxTicks, 150.0)};
  double worst = 0.0;
  std::size_t ticks = 0;
  for (double a : {0.001, 0.0043, 0.01}) {
    HealthParams p = testing::NoRecovery(a);
    Simulation sim(region, {MakeAgent(0, "d", 30, 0, 0)}, series, p, 1);
    std::uint32_t t = 0;
    for (bool more = true; more; ++t, ++ticks) {
      more = sim.Step();
      const double expected = 300.0 - std::pow(1.0 + a, static_cast<double>(t));
      worst = std::max(worst, std::abs(sim.states()[0].health / expected - 1.0));
    }
  }
  const double secs = Seconds(start);
  char buf[160];
  std::snprintf(buf, sizeof buf, "max relative error %.3g over %zu ticks, %.3f s", worst, ticks,
                secs);
  return {worst <= 1e-9 && secs < 1.0, buf};
}

Verdict Determinism(const Fixture& fx) {
  const cli::Context a{fx.dir / "run_a", 1, std::nullopt};
  const cli::Context b{fx.dir / "run_b", 1, std::nullopt};
  cli::CmdRun(a, fx.files.config);
  cli::CmdRun(b, fx.files.config);
  bool same = true;
  for (const char* f : {"trajectory.csv", "admissions.csv"})
    same = same && csv::ReadFile(a.out_dir / f) == csv::ReadFile(b.out_dir / f);
  const auto digest = Sha256File(a.out_dir / "trajectory.csv");
  return {same, "trajectory sha256 " + digest.substr(0, 16)};
}

// Criteria 3 and 4 share one sweep.
struct SweepVerdicts {
  Verdict alpha, road;
};

SweepVerdicts Sweep(const Fixture& fx, std::uint32_t replicates) {
  SweepSpec spec;
  spec.base = fx.config;
  spec.replicates = replicates;
  spec.seed_base = 1;
  const auto start = Clock::now();
  const auto cells = OfatSweep(spec, fx.inputs, Jobs());
  const double secs = Seconds(start);
  const std::size_t na = spec.alpha_grid.size();
  const std::size_t nr = spec.road_grid.size();
  auto rate = [&](std::size_t r, std::size_t a) { return cells[r * na + a].summary.final_mean(); };

  bool non_decreasing = true, strict = false;
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t a = 1; a < na; ++a) {
      non_decreasing = non_decreasing && rate(r, a - 1) <= rate(r, a);
      strict = strict || rate(r, a - 1) < rate(r, a);
    }
  bool ordered = true;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t r = 1; r < nr; ++r) ordered = ordered && rate(r - 1, a) <= rate(r, a);

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%u replicates, road 1.5: alpha 0.001 -> %.4f, 0.01 -> %.4f, %.0f s", replicates,
                rate(1, 0), rate(1, na - 1), secs);
  SweepVerdicts v;
  v.alpha = {non_decreasing && strict, buf};
  std::snprintf(buf, sizeof buf, "alpha %g, road 1 / 1.5 / 2: %.4f <= %.4f <= %.4f",
                spec.alpha_grid[3], rate(0, 3),
                rate(1, 3), rate(2, 3));
  v.road = {ordered, buf};
  return v;
}

Verdict Scenarios(const Fixture& fx) {
  const auto start = Clock::now();
  const auto cells = ScenarioMatrix(fx.config, fx.inputs, 20, Jobs());
  const double secs = Seconds(start);
  // Order: BAU-AC100, BAU-AC200, INC-AC100, INC-AC200.
  const double bau100 = cells[0].summary.final_mean(), bau200 = cells[1].summary.final_mean();
  const double inc100 = cells[2].summary.final_mean(), inc200 = cells[3].summary.final_mean();
  const bool ok = inc100 >= bau100 && inc200 >= bau200 && bau200 <= bau100 && inc200 <= inc100 &&
                  secs < 600.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "BAU %.4f/%.4f INC %.4f/%.4f (AC100/AC200), %.0f s", bau100,
                bau200, inc100, inc200, secs);
  return {ok, buf};
}

Verdict StopConditions(const Fixture& fx) {
  const auto clean = RunModel(fx.inputs, fx.Constant(kDefaultMaxTicks, 0.0), fx.config.params, 1,
                              kDefaultMaxTicks);
  HealthParams extreme = fx.config.params;
  extreme.alpha = 0.5;
  extreme.eta = {1.0, 1.0, 1.0};
  extreme.recovery = RecoveryTable::Zero();
  const auto hot =
      RunModel(fx.inputs, fx.Constant(kDefaultMaxTicks, 200.0), extreme, 1, kDefaultMaxTicks);
  const long stop_tick = static_cast<long>(hot.final_tick) - 1;  // index of the last tick
  const long predicted = ClosedFormStop(0.5);
  const bool ok = clean.stop_cause == StopCause::kMaxTicks && clean.final_tick == 8764 &&
                  hot.stop_cause == StopCause::kAllAtRisk && hot.final_tick < 1000 &&
                  std::abs(stop_tick - predicted) <= 1;
  return {ok, "clean run " + std::to_string(clean.final_tick) + " ticks (" +
                  std::string(ToString(clean.stop_cause)) + "); extreme run stops at tick " +
                  std::to_string(stop_tick) + " (" + std::string(ToString(hot.stop_cause)) +
                  "), closed form " + std::to_string(predicted)};
}

Verdict CalibrationOracle(const Fixture& fx) {
  auto spec = LoadCalibrationSpec(fx.files.calibration);
  const double alpha = 0.0043;
  const std::array<double, kGroupCount> eta{1.2, 1.0, 1.4};
  HealthParams planted = spec.base.params;
  planted.alpha = alpha;
  planted.eta = eta;
  const auto series = ScenarioSeries(fx.inputs, spec.base.scenario, spec.base.inc_rate);
  const auto truth = ReplicateAverage(fx.inputs, series, planted, spec.replicates, spec.seed_base,
                                      spec.base.max_ticks, Jobs());
  ObservedPatients observed;
  double total = 0.0;
  for (int b = 0; b < kAgeBinCount; ++b) {
    observed[b] = truth.mean_admissions[static_cast<std::size_t>(b)];
    total += observed[b];
  }
  const auto r = Calibrate(spec, fx.inputs, observed, Jobs());
  const bool ok = r.alpha == alpha && r.eta == eta && r.objective == 0.0 && total > 0.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%zu candidates, best alpha %g eta (%g, %g, %g), objective %g, %g admissions",
                r.candidates_evaluated, r.alpha, r.eta[0], r.eta[1], r.eta[2], r.objective, total);
  return {ok, buf};
}

Verdict Oscillation(const Fixture& fx) {
  std::vector<TickSeries> series = fx.Constant(kDefaultMaxTicks, 0.0);
  for (auto& s : series)
    for (std::size_t t = 0; t < s.values.size(); ++t) s.values[t] = (t / 56) % 2 ? 30.0 : 150.0;
  const auto r = RunModel(fx.inputs, series, fx.config.params, 1, kDefaultMaxTicks);
  Require(r.stop_cause == StopCause::kMaxTicks || r.final_tick > 200, ErrorKind::kRuntime,
          "oscillation run stopped too early");
  std::size_t rises_after_fall = 0;
  bool fallen = false;
  for (std::size_t t = 1; t < r.mean_health.size(); ++t) {
    if (r.mean_health[t] < r.mean_health[t - 1]) fallen = true;
    if (fallen && r.mean_health[t] > r.mean_health[t - 1]) ++rises_after_fall;
  }
  return {rises_after_fall > 0, std::to_string(rises_after_fall) + " rising ticks after a fall in " +
                                    std::to_string(r.mean_health.size()) + " ticks"};
}

HourlySeries Hourly(const std::vector<double>& values) {
  HourlySeries s;
  s.district_id = "x";
  s.start = Hour{std::chrono::sys_days{std::chrono::year{2010} / 1 / 1}};
  for (double v : values) s.values.emplace_back(v);
  return s;
}

// Masks `share` of the series in runs of 1 to `max_run` hours, keeping both
// ends observed.
std::vector<std::size_t> MaskRuns(HourlySeries& s, double share, std::size_t max_run,
                                  std::mt19937_64& rng) {
  const std::size_t n = s.values.size();
  const auto target = static_cast<std::size_t>(std::lround(share * static_cast<double>(n)));
  std::uniform_int_distribution<std::size_t> pos(1, n - max_run - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_run);
  std::size_t masked = 0;
  while (masked < target) {
    const std::size_t at = pos(rng);
    const std::size_t run = len(rng);
    for (std::size_t k = at; k < at + run && masked < target; ++k)
      if (s.values[k]) {
        s.values[k].reset();
        ++masked;
      }
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (!s.values[i]) idx.push_back(i);
  return idx;
}

std::vector<double> LinearInterpolation(const HourlySeries& s) {
  std::vector<double> out(s.values.size());
  std::size_t prev = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!s.values[i]) continue;
    out[i] = *s.values[i];
    for (std::size_t k = prev + 1; k < i; ++k) {
      const double w = static_cast<double>(k - prev) / static_cast<double>(i - prev);
      out[k] = (1.0 - w) * out[prev] + w * out[i];
    }
    prev = i;
  }
  return out;
}

// Constant series with single-hour holes, then ten AR(1) series shaped like
// the fixture PM10 process (lag-one correlation 0.985, gaps of 1-6 hours),
// with squared errors pooled over all masked hours.
Verdict Imputation() {
  const std::size_t n = 24 * 2191;
  const double share = 0.0215;

  std::mt19937_64 rng(2150);
  auto constant = Hourly(std::vector<double>(n, 47.25));
  const auto holes = MaskRuns(constant, share, 1, rng);
  const auto filled = Impute(constant);
  bool exact = filled.complete();
  for (const auto& v : filled.values) exact = exact && *v == 47.25;

  const double phi = 0.985, sd = 6.0;
  double se_k = 0.0, se_l = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> truth(n);
    double x = 0.0;
    for (auto& v : truth) {
      x = phi * x + sd * std::sqrt(1.0 - phi * phi) * z(gen);
      v = 50.0 + x;
    }
    auto masked = Hourly(truth);
    const auto mask = MaskRuns(masked, share, 6, gen);
    const auto kalman = Impute(masked);
    const auto linear = LinearInterpolation(masked);
    for (auto i : mask) {
      se_k += std::pow(*kalman.values[i] - truth[i], 2);
      se_l += std::pow(linear[i] - truth[i], 2);
    }
    count += mask.size();
  }
  const double rmse_k = std::sqrt(se_k / static_cast<double>(count));
  const double rmse_l = std::sqrt(se_l / static_cast<double>(count));
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "constant series %s (%zu masked); AR(1) pooled RMSE smoother %.5f vs linear "
                "%.5f over %zu hours",
                exact ? "exact" : "NOT exact", holes.size(), rmse_k, rmse_l, count);
  return {exact && rmse_k <= rmse_l, buf};
}

Verdict MovementGeometry(const Fixture& fx) {
  const auto agents = BuildPopulation(fx.inputs, 1);
  const std::uint32_t work_ticks = 10000;
  const std::uint32_t total = 2 * work_ticks;
  const auto series = fx.Constant(total, 0.0);
  Simulation sim(fx.inputs.region, agents, series, fx.config.params, 1, total);

  struct Track {
    std::size_t agent;
    const World* world;
    double radius;
    std::set<CellIndex> seen;
  };
  std::vector<Track> tracks;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    if (a.group == AgeGroup::kActive) continue;
    tracks.push_back({i, &fx.inputs.region.get(a.home_district),
                      a.group == AgeGroup::kYoung ? kYoungRadius : kOldRadius, {}});
  }
  std::size_t outside = 0, young = 0, old = 0, observed = 0;
  for (std::uint32_t t = 0; t < total; ++t) {
    sim.Step();
    if (Simulation::KindOf(t) != TickKind::kWork) continue;
    ++observed;
    for (auto& tr : tracks) {
      const auto& cur = sim.states()[tr.agent].current;
      const Cell& home = tr.world->cells[agents[tr.agent].home_cell];
      const Cell& here = tr.world->cells[cur.cell];
      const double dc = here.col - home.col, dr = here.row - home.row;
      if (fx.inputs.region.worlds[cur.district].district_id != agents[tr.agent].home_district ||
          dc * dc + dr * dr > tr.radius * tr.radius)
        ++outside;
      tr.seen.insert(cur.cell);
    }
  }
  std::size_t uncovered = 0, full_young = 0, full_old = 0;
  for (const auto& tr : tracks) {
    const auto admissible = NeighborsWithin(*tr.world, agents[tr.agent].home_cell, tr.radius);
    if (std::set<CellIndex>(admissible.begin(), admissible.end()) != tr.seen) ++uncovered;
    const bool is_young = tr.radius == kYoungRadius;
    (is_young ? young : old)++;
    if (admissible.size() == (is_young ? 29u : 5u)) (is_young ? full_young : full_old)++;
  }
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "%zu work ticks, %zu young / %zu old agents (%zu / %zu with full 29 / 5 cell "
                "disks), %zu out-of-disk visits, %zu agents with incomplete support",
                observed, young, old, full_young, full_old, outside, uncovered);
  return {observed == work_ticks && outside == 0 && uncovered == 0 && young > 0 && old > 0, buf};
}

int Main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "closed-form health decay", ClosedForm);
  const Fixture fx;
  report(2, "determinism", [&] { return Determinism(fx); });
  SweepVerdicts sweep;
  try {
    sweep = Sweep(fx, 3);
  } catch (const std::exception& e) {
    sweep.alpha = sweep.road = {false, std::string("error: ") + e.what()};
  }
  report(3, "alpha monotonicity", [&] { return sweep.alpha; });
  report(4, "road ordering", [&] { return sweep.road; });
  report(5, "scenario ordering", [&] { return Scenarios(fx); });
  report(6, "stop conditions", [&] { return StopConditions(fx); });
  report(7, "calibration oracle", [&] { return CalibrationOracle(fx); });
  report(8, "oscillating mean health", [&] { return Oscillation(fx); });
  report(9, "imputation", Imputation);
  report(10, "movement geometry", [&] { return MovementGeometry(fx); });
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace exposure_abm

int main() { return exposure_abm::Main(); }
