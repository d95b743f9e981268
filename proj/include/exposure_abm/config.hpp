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

// Run configuration (JSON), loading of every model input it references, and
// a single simulation run from loaded inputs.

#ifndef EXPOSURE_ABM_CONFIG_HPP_
#define EXPOSURE_ABM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/csv.hpp"
#include "exposure_abm/dynamics.hpp"
#include "exposure_abm/environment.hpp"
#include "exposure_abm/error.hpp"
#include "exposure_abm/pollution.hpp"
#include "exposure_abm/population.hpp"
#include "exposure_abm/raster.hpp"
#include "json.hpp"

namespace exposure_abm {

inline constexpr std::string_view kRunConfigSchema = "exposure-abm/run-config/v1";

enum class PollutionScenario { kAsIs, kBau, kInc };

constexpr std::string_view ToString(PollutionScenario s) {
  switch (s) {
    case PollutionScenario::kAsIs: return "none";
    case PollutionScenario::kBau: return "BAU";
    case PollutionScenario::kInc: return "INC";
  }
  return "?";
}

enum class Pm10Format { kHourly, kTicks };

struct DistrictSource {
  std::string id;
  std::filesystem::path land_cover;
  std::filesystem::path land_price;
  PriceRasterKind price_kind = PriceRasterKind::kGrade;
  std::filesystem::path pm10;
  Pm10Format pm10_format = Pm10Format::kHourly;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<DistrictSource> districts;
  std::filesystem::path census;
  std::filesystem::path od;
  double sample_rate = 0.05;
  int price_grades = 5;
  PollutionScenario scenario = PollutionScenario::kBau;
  double inc_rate = 0.03;
  std::string observed_start = "2010-01-01";
  HealthParams params;
  std::uint64_t seed = 1;
  std::uint32_t max_ticks = kDefaultMaxTicks;
};

namespace detail {

using nlohmann::json;

inline void CheckKeys(const json& j, std::string_view what,
                      std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) Fail(ErrorKind::kConfiguration, std::string(what) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) Fail(ErrorKind::kConfiguration, std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T Get(const json& j, std::string_view key, T fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfiguration, "'" + std::string(key) + "': " + e.what());
  }
}

inline std::string GetString(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_string())
    Fail(ErrorKind::kConfiguration, "missing string field '" + std::string(key) + "'");
  return it->get<std::string>();
}

inline std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

inline HealthParams ParseHealthParams(const nlohmann::json& j) {
  using detail::Get;
  detail::CheckKeys(j, "params",
                    {"alpha", "eta", "h_max", "threshold", "adaptive_capacity", "road_multiplier",
                     "recovery", "hospital_stay", "discharge_health", "at_risk_health"});
  HealthParams p;
  p.alpha = Get(j, "alpha", p.alpha);
  if (j.contains("eta")) {
    const auto& e = j.at("eta");
    detail::CheckKeys(e, "params.eta", {"young", "active", "old"});
    for (std::size_t g = 0; g < kGroupCount; ++g)
      p.eta[g] = Get(e, ToString(static_cast<AgeGroup>(g)), p.eta[g]);
  }
  p.h_max = Get(j, "h_max", p.h_max);
  p.threshold = Get(j, "threshold", p.threshold);
  p.adaptive_capacity = Get(j, "adaptive_capacity", p.adaptive_capacity);
  p.road_multiplier = Get(j, "road_multiplier", p.road_multiplier);
  if (j.contains("recovery")) {
    try {
      p.recovery = RecoveryTable(Get(j, "recovery", std::vector<double>{}));
    } catch (const Error& e) {
      Fail(ErrorKind::kConfiguration, std::string("params.recovery: ") + e.what());
    }
  }
  p.hospital_stay = Get(j, "hospital_stay", p.hospital_stay);
  p.discharge_health = Get(j, "discharge_health", p.discharge_health);
  p.at_risk_health = Get(j, "at_risk_health", p.at_risk_health);
  try {
    p.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfiguration, std::string("params: ") + e.what());
  }
  return p;
}

inline nlohmann::json ToJson(const HealthParams& p) {
  return {
      {"alpha", p.alpha},
      {"eta", {{"young", p.eta[0]}, {"active", p.eta[1]}, {"old", p.eta[2]}}},
      {"h_max", p.h_max},
      {"threshold", p.threshold},
      {"adaptive_capacity", p.adaptive_capacity},
      {"road_multiplier", p.road_multiplier},
      {"recovery", p.recovery.values()},
      {"hospital_stay", p.hospital_stay},
      {"discharge_health", p.discharge_health},
      {"at_risk_health", p.at_risk_health},
  };
}

inline PollutionScenario ParseScenario(std::string_view s) {
  if (s == "BAU" || s == "bau") return PollutionScenario::kBau;
  if (s == "INC" || s == "inc") return PollutionScenario::kInc;
  if (s == "none") return PollutionScenario::kAsIs;
  Fail(ErrorKind::kConfiguration, "scenario must be BAU, INC or none, got '" + std::string(s) + "'");
}

inline RunConfig ParseRunConfig(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  using detail::Get;
  detail::CheckKeys(j, "run config",
                    {"schema", "districts", "census", "od", "sample_rate", "price_grades",
                     "scenario", "inc_rate", "observed_start", "params", "seed", "max_ticks"});
  const auto schema = Get<std::string>(j, "schema", "");
  Require(schema == kRunConfigSchema, ErrorKind::kConfiguration,
          "run config schema must be '" + std::string(kRunConfigSchema) + "'");
  RunConfig c;
  c.base_dir = base_dir;
  if (!j.contains("districts") || !j.at("districts").is_array() || j.at("districts").empty())
    Fail(ErrorKind::kConfiguration, "run config needs a non-empty 'districts' array");
  for (const auto& d : j.at("districts")) {
    detail::CheckKeys(d, "district",
                      {"id", "land_cover", "land_price", "price_kind", "pm10", "pm10_format"});
    DistrictSource src;
    src.id = detail::GetString(d, "id");
    src.land_cover = detail::Resolve(base_dir, detail::GetString(d, "land_cover"));
    src.land_price = detail::Resolve(base_dir, detail::GetString(d, "land_price"));
    const auto kind = Get<std::string>(d, "price_kind", "grade");
    if (kind == "grade") src.price_kind = PriceRasterKind::kGrade;
    else if (kind == "price") src.price_kind = PriceRasterKind::kPrice;
    else Fail(ErrorKind::kConfiguration, "price_kind must be grade or price");
    src.pm10 = detail::Resolve(base_dir, detail::GetString(d, "pm10"));
    const auto fmt = Get<std::string>(d, "pm10_format", "hourly");
    if (fmt == "hourly") src.pm10_format = Pm10Format::kHourly;
    else if (fmt == "ticks") src.pm10_format = Pm10Format::kTicks;
    else Fail(ErrorKind::kConfiguration, "pm10_format must be hourly or ticks");
    c.districts.push_back(std::move(src));
  }
  c.census = detail::Resolve(base_dir, detail::GetString(j, "census"));
  c.od = detail::Resolve(base_dir, detail::GetString(j, "od"));
  c.sample_rate = Get(j, "sample_rate", c.sample_rate);
  Require(c.sample_rate > 0.0 && c.sample_rate <= 1.0, ErrorKind::kConfiguration,
          "sample_rate must be in (0, 1]");
  c.price_grades = Get(j, "price_grades", c.price_grades);
  c.scenario = ParseScenario(Get<std::string>(j, "scenario", "BAU"));
  c.inc_rate = Get(j, "inc_rate", c.inc_rate);
  Require(c.inc_rate > -1.0, ErrorKind::kConfiguration, "inc_rate must be > -1");
  c.observed_start = Get(j, "observed_start", c.observed_start);
  Require(ParseIsoHour(c.observed_start).has_value(), ErrorKind::kConfiguration,
          "observed_start must be an ISO date");
  if (j.contains("params")) c.params = ParseHealthParams(j.at("params"));
  c.seed = Get(j, "seed", c.seed);
  c.max_ticks = Get(j, "max_ticks", c.max_ticks);
  Require(c.max_ticks > 0, ErrorKind::kConfiguration, "max_ticks must be positive");
  return c;
}

inline nlohmann::json ParseJsonText(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kConfiguration, source + ": " + e.what());
  }
}

inline nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::string text;
  try {
    text = csv::ReadFile(path);
  } catch (const Error& e) {
    Fail(ErrorKind::kConfiguration, e.what());
  }
  return ParseJsonText(text, path.string());
}

inline RunConfig LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(ReadJsonFile(path), path.parent_path());
}

inline nlohmann::json ToJson(const RunConfig& c) {
  nlohmann::json districts = nlohmann::json::array();
  for (const auto& d : c.districts) {
    districts.push_back({
        {"id", d.id},
        {"land_cover", d.land_cover.string()},
        {"land_price", d.land_price.string()},
        {"price_kind", d.price_kind == PriceRasterKind::kGrade ? "grade" : "price"},
        {"pm10", d.pm10.string()},
        {"pm10_format", d.pm10_format == Pm10Format::kHourly ? "hourly" : "ticks"},
    });
  }
  return {
      {"schema", kRunConfigSchema},
      {"districts", districts},
      {"census", c.census.string()},
      {"od", c.od.string()},
      {"sample_rate", c.sample_rate},
      {"price_grades", c.price_grades},
      {"scenario", ToString(c.scenario)},
      {"inc_rate", c.inc_rate},
      {"observed_start", c.observed_start},
      {"params", ToJson(c.params)},
      {"seed", c.seed},
      {"max_ticks", c.max_ticks},
  };
}

// Everything a run needs that does not depend on the seed or parameters.
struct ModelInputs {
  Region region;
  CensusTable census;
  ODMatrix od;
  double sample_rate = 0.05;
  std::vector<TickSeries> observed;  // one per region district, same order
  SeasonCalendar calendar;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

// Worlds, census and OD matrix, without the PM10 series.
inline ModelInputs LoadPopulationInputs(const RunConfig& config) {
  ModelInputs in;
  in.sample_rate = config.sample_rate;
  for (const auto& d : config.districts) {
    const auto cover = LoadRaster(d.land_cover);
    const auto price = LoadRaster(d.land_price);
    World w = BuildWorld(cover, price, d.id, d.price_kind, config.price_grades);
    in.warnings.insert(in.warnings.end(), w.warnings.begin(), w.warnings.end());
    in.region.add(std::move(w));
    in.files.insert(in.files.end(), {d.land_cover, d.land_price});
  }
  in.census = ReadCensusCsv(config.census);
  in.od = ReadOdCsv(config.od);
  in.files.insert(in.files.end(), {config.census, config.od});
  for (const auto& [district, _] : in.census.districts)
    Require(in.region.index_of(district).has_value(), ErrorKind::kConfiguration,
            "census district '" + district + "' has no world in the config");
  return in;
}

inline ModelInputs LoadInputs(const RunConfig& config) {
  ModelInputs in = LoadPopulationInputs(config);
  for (const auto& d : config.districts) {
    if (d.pm10_format == Pm10Format::kHourly) {
      in.observed.push_back(AggregateToTicks(Impute(ReadHourlyCsv(d.pm10, d.id))));
    } else {
      in.observed.push_back(ReadTickCsv(d.pm10, d.id));
    }
    in.files.push_back(d.pm10);
  }

  const std::size_t len = in.observed.front().size();
  for (const auto& s : in.observed)
    Require(s.size() == len, ErrorKind::kConfiguration,
            "PM10 series differ in length across districts");
  Require(len >= 2 && len % 2 == 0, ErrorKind::kConfiguration,
          "PM10 tick series must cover whole days");
  const auto start = ParseIsoHour(config.observed_start);
  in.calendar = SeasonCalendar::Build(std::chrono::floor<std::chrono::days>(*start), len / 2, 2);
  return in;
}

inline std::vector<TickSeries> ScenarioSeries(const ModelInputs& in, PollutionScenario scenario,
                                              double inc_rate = 0.03) {
  std::vector<TickSeries> out;
  for (const auto& s : in.observed) {
    switch (scenario) {
      case PollutionScenario::kAsIs: out.push_back(s); break;
      case PollutionScenario::kBau: out.push_back(ProjectBau(s, in.calendar)); break;
      case PollutionScenario::kInc: out.push_back(ProjectInc(s, in.calendar, inc_rate)); break;
    }
  }
  return out;
}

inline std::vector<AgentSpec> BuildPopulation(const ModelInputs& in, std::uint64_t seed) {
  auto agents = Synthesize(in.census, in.sample_rate, seed);
  AssignLocations(agents, in.region, in.od, seed);
  return agents;
}

inline RunResult RunModel(const ModelInputs& in, const std::vector<TickSeries>& series,
                          const HealthParams& params, std::uint64_t seed,
                          std::uint32_t max_ticks) {
  Simulation sim(in.region, BuildPopulation(in, seed), series, params, seed, max_ticks);
  return sim.Run();
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_CONFIG_HPP_
