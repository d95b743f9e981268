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


// Command implementations behind the exposure_abm binary. Each command
// writes its artifacts and a manifest.json into one output directory.

#ifndef EXPOSURE_ABM_CLI_HPP_
#define EXPOSURE_ABM_CLI_HPP_

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "exposure_abm/checksum.hpp"
#include "exposure_abm/config.hpp"
#include "exposure_abm/csv.hpp"
#include "exposure_abm/dynamics.hpp"
#include "exposure_abm/environment.hpp"
#include "exposure_abm/error.hpp"
#include "exposure_abm/experiments.hpp"
#include "exposure_abm/fixtures.hpp"
#include "exposure_abm/pollution.hpp"
#include "exposure_abm/svg_plot.hpp"
#include "json.hpp"

#ifndef EXPOSURE_ABM_VERSION
#define EXPOSURE_ABM_VERSION "0.0.0"
#endif

namespace exposure_abm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view kEngineVersion = EXPOSURE_ABM_VERSION;
inline constexpr std::string_view kManifestSchema = "exposure-abm/manifest/v1";
inline constexpr const char* kSeedEnv = "EXPOSURE_ABM_SEED";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnusable = 3;
inline constexpr int kExitRuntime = 4;

inline int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
    case ErrorKind::kParse:
    case ErrorKind::kConfiguration:
    case ErrorKind::kMustImputeFirst:
      return kExitConfig;
    case ErrorKind::kUnusableSeries:
      return kExitUnusable;
    case ErrorKind::kUndefinedRate:
    case ErrorKind::kCalibrationFailed:
    case ErrorKind::kRuntime:
      return kExitRuntime;
  }
  return kExitRuntime;
}

inline json ErrorReport(std::string_view command, std::string_view kind, std::string_view message,
                        int exit_code) {
  return {{"error",
           {{"command", command}, {"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
}

// Parses the seed override; a malformed value is a configuration error.
inline std::optional<std::uint64_t> ParseSeedOverride(const char* value) {
  if (value == nullptr || *value == '\0') return std::nullopt;
  const std::string_view s(value);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  Require(ec == std::errc() && ptr == s.data() + s.size(), ErrorKind::kConfiguration,
          std::string(kSeedEnv) + " must be a non-negative integer, got '" + std::string(s) + "'");
  return seed;
}

inline std::optional<std::uint64_t> SeedFromEnvironment() {
  return ParseSeedOverride(std::getenv(kSeedEnv));
}

struct Context {
  fs::path out_dir = ".";
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Collects the files a command writes, all inside one directory, and the
// manifest describing them.
class Output {
 public:
  Output(const Context& ctx, std::string command) : dir_(ctx.out_dir) {
    manifest_["schema"] = kManifestSchema;
    manifest_["command"] = std::move(command);
    manifest_["engine_version"] = kEngineVersion;
    manifest_["inputs"] = json::array();
    manifest_["outputs"] = json::array();
    manifest_["timings_s"] = json::object();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    Require(!ec && fs::is_directory(dir_), ErrorKind::kRuntime,
            "cannot create output directory " + dir_.string());
  }

  const fs::path& dir() const { return dir_; }
  json& manifest() { return manifest_; }

  fs::path Write(const std::string& name, std::string_view content) {
    const fs::path rel(name);
    Require(rel.has_filename() && rel == rel.filename(), ErrorKind::kRuntime,
            "output name must be a plain file name: " + name);
    const fs::path path = dir_ / rel;
    try {
      csv::WriteFile(path, content);
    } catch (const Error& e) {
      Fail(ErrorKind::kRuntime, e.what());
    }
    manifest_["outputs"].push_back({{"file", name}, {"sha256", Sha256Hex(content)}});
    return path;
  }

  void AddInput(const fs::path& path) {
    manifest_["inputs"].push_back({{"path", path.string()}, {"sha256", Sha256File(path)}});
  }
  void AddInputs(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) AddInput(p);
  }
  void Time(const std::string& stage, double seconds) { manifest_["timings_s"][stage] = seconds; }

  fs::path Finish() { return Write("manifest.json", manifest_.dump(2) + "\n"); }

 private:
  fs::path dir_;
  json manifest_;
};

inline std::uint64_t EffectiveSeed(const Context& ctx, std::uint64_t configured) {
  return ctx.seed_override.value_or(configured);
}

inline RunConfig LoadConfigWithSeed(const Context& ctx, const fs::path& config_path) {
  RunConfig cfg = LoadRunConfig(config_path);
  cfg.seed = EffectiveSeed(ctx, cfg.seed);
  return cfg;
}

// ---------------------------------------------------------------------------
// impute: hourly CSV -> gap-free hourly CSV and tick CSV.

inline void CmdImpute(const Context& ctx, const fs::path& in_csv, std::string district) {
  Stopwatch clock;
  Output out(ctx, "impute");
  if (district.empty()) district = in_csv.stem().string();
  const auto hourly = ReadHourlyCsv(in_csv, district);
  out.AddInput(in_csv);
  out.Time("read", clock.lap());
  const auto filled = Impute(hourly);
  const auto ticks = AggregateToTicks(filled);
  out.Time("impute", clock.lap());
  out.Write("imputed_hourly.csv", FormatHourlyCsv(filled));
  out.Write("ticks.csv", FormatTickCsv(ticks));
  auto& m = out.manifest();
  m["district"] = district;
  m["hours"] = hourly.values.size();
  m["missing_hours"] = hourly.missing();
  m["ticks"] = ticks.size();
  out.Time("write", clock.lap());
  out.Finish();
}

// ---------------------------------------------------------------------------
// build-world: one world_<district>.json per configured district.

inline void CmdBuildWorld(const Context& ctx, const fs::path& config_path) {
  Stopwatch clock;
  Output out(ctx, "build-world");
  const RunConfig cfg = LoadRunConfig(config_path);
  out.AddInput(config_path);
  auto& m = out.manifest();
  m["config"] = ToJson(cfg);
  m["worlds"] = json::array();
  for (const auto& d : cfg.districts) {
    const auto cover = LoadRaster(d.land_cover);
    const auto price = LoadRaster(d.land_price);
    const World w = BuildWorld(cover, price, d.id, d.price_kind, cfg.price_grades);
    json wm = WorldManifest(w);
    wm["inputs"] = {{{"path", d.land_cover.string()}, {"sha256", Sha256File(d.land_cover)}},
                    {{"path", d.land_price.string()}, {"sha256", Sha256File(d.land_price)}}};
    out.AddInputs({d.land_cover, d.land_price});
    const std::string name = "world_" + d.id + ".json";
    out.Write(name, wm.dump(2) + "\n");
    m["worlds"].push_back(name);
  }
  out.Time("build", clock.lap());
  out.Finish();
}

// ---------------------------------------------------------------------------
// synth-pop: agents.csv.

inline void CmdSynthPop(const Context& ctx, const fs::path& config_path) {
  Stopwatch clock;
  Output out(ctx, "synth-pop");
  const RunConfig cfg = LoadConfigWithSeed(ctx, config_path);
  const ModelInputs in = LoadPopulationInputs(cfg);
  out.AddInput(config_path);
  out.AddInputs(in.files);
  out.Time("load", clock.lap());
  const auto agents = BuildPopulation(in, cfg.seed);
  out.Time("synthesize", clock.lap());
  out.Write("agents.csv", FormatAgentsCsv(agents, in.region));
  auto& m = out.manifest();
  m["config"] = ToJson(cfg);
  m["seed"] = cfg.seed;
  m["agents"] = agents.size();
  m["warnings"] = in.warnings;
  out.Finish();
}

// ---------------------------------------------------------------------------
// run: trajectory.csv, admissions.csv and optionally the final agent states.

struct RunOptions {
  bool snapshot = false;
};

inline RunResult CmdRun(const Context& ctx, const fs::path& config_path,
                        const RunOptions& opt = {}) {
  Stopwatch clock;
  Output out(ctx, "run");
  const RunConfig cfg = LoadConfigWithSeed(ctx, config_path);
  const ModelInputs in = LoadInputs(cfg);
  const auto series = ScenarioSeries(in, cfg.scenario, cfg.inc_rate);
  out.AddInput(config_path);
  out.AddInputs(in.files);
  out.Time("load", clock.lap());

  Simulation sim(in.region, BuildPopulation(in, cfg.seed), series, cfg.params, cfg.seed,
                 cfg.max_ticks);
  const RunResult result = sim.Run();
  out.Time("simulate", clock.lap());

  out.Write("trajectory.csv", FormatTrajectoryCsv(result));
  out.Write("admissions.csv", FormatAdmissionsCsv(result));
  if (opt.snapshot) out.Write("snapshot.csv", FormatSnapshotCsv(sim));
  out.Time("write", clock.lap());

  auto& m = out.manifest();
  m["config"] = ToJson(cfg);
  m["seed"] = cfg.seed;
  m["stop_cause"] = ToString(result.stop_cause);
  m["ticks"] = result.final_tick;
  m["agents"] = sim.agents().size();
  m["assessed"] = result.assessed[kAllGroups];
  m["final_at_risk_rate"] = result.final_rate(kAllGroups);
  m["warnings"] = in.warnings;
  out.Finish();
  return result;
}

// ---------------------------------------------------------------------------
// sweep: sweep.csv over the (alpha, road multiplier) grid.

struct ExperimentOptions {
  std::optional<std::uint32_t> replicates;  // overrides the spec or default
};

inline std::vector<SweepCell> CmdSweep(const Context& ctx, const fs::path& spec_path,
                                       const ExperimentOptions& opt = {}) {
  Stopwatch clock;
  Output out(ctx, "sweep");
  SweepSpec spec = LoadSweepSpec(spec_path);
  spec.seed_base = EffectiveSeed(ctx, spec.seed_base);
  if (opt.replicates) spec.replicates = *opt.replicates;
  spec.Validate();
  const ModelInputs in = LoadInputs(spec.base);
  out.AddInput(spec_path);
  out.AddInputs(in.files);
  out.Time("load", clock.lap());
  auto cells = OfatSweep(spec, in, ctx.jobs);
  out.Time("simulate", clock.lap());
  out.Write("sweep.csv", FormatSweepCsv(cells));

  auto& m = out.manifest();
  m["config"] = ToJson(spec.base);
  m["seed"] = spec.seed_base;
  m["alpha_grid"] = spec.alpha_grid;
  m["road_grid"] = spec.road_grid;
  m["replicates"] = spec.replicates;
  m["jobs"] = ctx.jobs;
  json causes = json::array();
  for (const auto& c : cells) {
    json per = json::array();
    for (auto sc : c.summary.stop_causes) per.push_back(ToString(sc));
    causes.push_back({{"alpha", c.alpha}, {"road", c.road_multiplier}, {"stop_causes", per}});
  }
  m["stop_causes"] = causes;
  m["warnings"] = in.warnings;
  out.Finish();
  return cells;
}

// ---------------------------------------------------------------------------
// scenarios: scenarios.csv for {BAU, INC} x {AC100, AC200}.

inline std::vector<ScenarioCell> CmdScenarios(const Context& ctx, const fs::path& config_path,
                                              const ExperimentOptions& opt = {}) {
  Stopwatch clock;
  Output out(ctx, "scenarios");
  const RunConfig cfg = LoadConfigWithSeed(ctx, config_path);
  const std::uint32_t replicates = opt.replicates.value_or(20);
  Require(replicates >= 1, ErrorKind::kConfiguration, "replicates must be >= 1");
  const ModelInputs in = LoadInputs(cfg);
  out.AddInput(config_path);
  out.AddInputs(in.files);
  out.Time("load", clock.lap());
  auto cells = ScenarioMatrix(cfg, in, replicates, ctx.jobs);
  out.Time("simulate", clock.lap());
  out.Write("scenarios.csv", FormatScenariosCsv(cells));

  auto& m = out.manifest();
  m["config"] = ToJson(cfg);
  m["seed"] = cfg.seed;
  m["replicates"] = replicates;
  m["jobs"] = ctx.jobs;
  json summary = json::array();
  for (const auto& c : cells) {
    json per = json::array();
    for (auto sc : c.summary.stop_causes) per.push_back(ToString(sc));
    summary.push_back({{"scenario", c.label()},
                       {"final_mean_rate", c.summary.final_mean()},
                       {"stop_causes", per}});
  }
  m["cells"] = summary;
  m["warnings"] = in.warnings;
  out.Finish();
  return cells;
}

// ---------------------------------------------------------------------------
// calibrate: calibration.csv for the best (alpha, eta) candidate.

inline CalibrationResult CmdCalibrate(const Context& ctx, const fs::path& spec_path,
                                      const fs::path& observed_csv,
                                      const ExperimentOptions& opt = {}) {
  Stopwatch clock;
  Output out(ctx, "calibrate");
  CalibrationSpec spec = LoadCalibrationSpec(spec_path);
  spec.seed_base = EffectiveSeed(ctx, spec.seed_base);
  if (opt.replicates) spec.replicates = *opt.replicates;
  const auto observed = ReadObservedCsv(observed_csv);
  const ModelInputs in = LoadInputs(spec.base);
  out.AddInputs({spec_path, observed_csv});
  out.AddInputs(in.files);
  out.Time("load", clock.lap());
  auto result = Calibrate(spec, in, observed, ctx.jobs);
  out.Time("calibrate", clock.lap());
  out.Write("calibration.csv", FormatCalibrationCsv(result));

  auto& m = out.manifest();
  m["config"] = ToJson(spec.base);
  m["seed"] = spec.seed_base;
  m["replicates"] = spec.replicates;
  m["jobs"] = ctx.jobs;
  m["best"] = {{"alpha", result.alpha},
               {"eta", {{"young", result.eta[0]}, {"active", result.eta[1]}, {"old", result.eta[2]}}},
               {"objective", result.objective}};
  m["candidates_evaluated"] = result.candidates_evaluated;
  m["warnings"] = in.warnings;
  out.Finish();
  return result;
}

// ---------------------------------------------------------------------------
// plot: SVG line chart of a trajectory, sweep or scenarios CSV.

inline fs::path CmdPlot(const Context& ctx, const fs::path& csv_path, std::string name = {}) {
  Output out(ctx, "plot");
  if (name.empty()) name = csv_path.stem().string() + ".svg";
  const std::string svg = plot::RenderCsv(csv::ReadFile(csv_path), csv_path.string());
  out.AddInput(csv_path);
  const fs::path written = out.Write(name, svg);
  out.Finish();
  return written;
}

// ---------------------------------------------------------------------------
// fixtures generate: synthetic two-district inputs.

inline fixtures::FixtureFiles CmdFixturesGenerate(const Context& ctx,
                                                  const fixtures::FixtureOptions& opt) {
  Stopwatch clock;
  Output out(ctx, "fixtures generate");
  auto files = fixtures::Generate(out.dir(), opt);
  out.Time("generate", clock.lap());
  auto& m = out.manifest();
  m["seed"] = opt.seed;
  m["grid_size"] = opt.grid_size;
  m["target_agents"] = opt.target_agents;
  for (const auto& f : files.all)
    m["outputs"].push_back({{"file", f.filename().string()}, {"sha256", Sha256File(f)}});
  out.Finish();
  return files;
}

}  // namespace exposure_abm::cli

#endif  // EXPOSURE_ABM_CLI_HPP_
