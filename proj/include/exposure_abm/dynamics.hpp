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

// The tick loop. Each half-day tick moves agents, exposes them to the PM10 of
// the cell they stand on, applies the health-loss/recovery update, handles
// hospital admission and discharge, and records the at-risk population.

#ifndef EXPOSURE_ABM_DYNAMICS_HPP_
#define EXPOSURE_ABM_DYNAMICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exposure_abm/environment.hpp"
#include "exposure_abm/error.hpp"
#include "exposure_abm/pollution.hpp"
#include "exposure_abm/population.hpp"
#include "exposure_abm/rng.hpp"

namespace exposure_abm {

inline constexpr std::uint32_t kDefaultMaxTicks = 8764;  // 12 years of half days
inline constexpr double kYoungRadius = 3.0;
inline constexpr double kOldRadius = 1.0;

struct HealthParams {
  double alpha = 0.0043;
  std::array<double, kGroupCount> eta{1.0, 1.0, 1.0};  // young, active, old
  double h_max = 300.0;
  double threshold = 100.0;  // PM10 exceedance level, ug/m3
  double adaptive_capacity = 100.0;
  double road_multiplier = 1.5;
  RecoveryTable recovery = RecoveryTable::Default();
  std::uint32_t hospital_stay = 28;
  double discharge_health = 100.0;
  double at_risk_health = 100.0;  // strictly below this is at risk

  double eta_of(AgeGroup g) const { return eta[static_cast<std::size_t>(g)]; }

  void Validate() const {
    Require(alpha > 0.0 && alpha < 1.0, ErrorKind::kValidation, "alpha must be in (0, 1)");
    for (double e : eta)
      Require(e > 0.0 && std::isfinite(e), ErrorKind::kValidation, "eta must be positive");
    Require(h_max > 0.0 && std::isfinite(h_max), ErrorKind::kValidation, "h_max must be positive");
    Require(adaptive_capacity > 0.0 && adaptive_capacity <= h_max, ErrorKind::kValidation,
            "adaptive capacity must be in (0, h_max]");
    Require(threshold >= 0.0 && std::isfinite(threshold), ErrorKind::kValidation,
            "threshold must be non-negative");
    Require(road_multiplier >= 1.0 && std::isfinite(road_multiplier), ErrorKind::kValidation,
            "road multiplier must be >= 1");
    Require(hospital_stay >= 1, ErrorKind::kValidation, "hospital stay must be >= 1 tick");
    Require(discharge_health > 0.0 && discharge_health <= h_max, ErrorKind::kValidation,
            "discharge health must be in (0, h_max]");
  }
};

// One forward-Euler tick of the health equation. `loss_rate` is alpha * eta,
// `recovery` the per-tick recovery of the agent's price grade.
//
// Above the threshold the deficit from h_max grows by loss_rate * deficit; a
// pristine agent (zero deficit) takes a one-unit seed decrement instead.
// Recovery applies only below the adaptive capacity and never lifts health
// past it.
inline double UpdateHealth(double h, double pm10, double loss_rate, double recovery,
                           const HealthParams& p) {
  const double r = h < p.adaptive_capacity ? recovery : 0.0;
  double next;
  if (pm10 >= p.threshold) {
    const double deficit = p.h_max - h;
    next = deficit == 0.0 ? h - 1.0 : h - loss_rate * deficit + r;
  } else {
    next = h + r;
  }
  if (r > 0.0 && next > h) next = std::min(next, p.adaptive_capacity);
  return std::clamp(next, 0.0, p.h_max);
}

inline double UpdateHealth(double h, double pm10, const HealthParams& p, AgeGroup group,
                           int grade) {
  return UpdateHealth(h, pm10, p.alpha * p.eta_of(group), p.recovery.at(grade), p);
}

enum class Status : std::uint8_t { kActive, kHospitalized };

struct CellRef {
  std::uint32_t district = 0;
  CellIndex cell = 0;
  friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct AgentState {
  double health = 300.0;
  Status status = Status::kActive;
  std::uint32_t remaining_ticks = 0;  // while hospitalized
  std::uint32_t admissions = 0;
  CellRef current;

  bool hospitalized() const { return status == Status::kHospitalized; }
};

// Admits an agent whose health reached zero, or advances the stay of one
// already in hospital, discharging it at the end of its last tick. Returns
// true on admission.
inline bool HospitalizeCheck(AgentState& a, const HealthParams& p) {
  if (a.hospitalized()) {
    if (--a.remaining_ticks == 0) {
      a.status = Status::kActive;
      a.health = p.discharge_health;
    }
    return false;
  }
  if (a.health <= 0.0) {
    a.status = Status::kHospitalized;
    a.remaining_ticks = p.hospital_stay;
    ++a.admissions;
    return true;
  }
  return false;
}

enum class StopCause { kMaxTicks, kAllAtRisk };

constexpr std::string_view ToString(StopCause c) {
  return c == StopCause::kMaxTicks ? "max_ticks" : "all_at_risk";
}

// Per-tick counts are indexed young, active, old, all.
inline constexpr std::size_t kAllGroups = 3;
using GroupCounts = std::array<std::uint32_t, kGroupCount + 1>;

inline std::string_view GroupColumnName(std::size_t g) {
  return g == kAllGroups ? "all" : ToString(static_cast<AgeGroup>(g));
}

struct RunResult {
  GroupCounts assessed{};
  std::vector<GroupCounts> at_risk;  // one entry per executed tick
  std::vector<double> mean_health;   // assessed agents, per executed tick
  std::array<std::uint64_t, kAgeBinCount> admissions_by_bin{};
  StopCause stop_cause = StopCause::kMaxTicks;
  std::uint32_t final_tick = 0;  // ticks executed

  double rate(std::size_t tick, std::size_t group = kAllGroups) const {
    const auto denom = assessed[group];
    return denom == 0 ? 0.0 : static_cast<double>(at_risk.at(tick)[group]) / denom;
  }
  double final_rate(std::size_t group = kAllGroups) const {
    return at_risk.empty() ? 0.0 : rate(at_risk.size() - 1, group);
  }
};

// Visual category of an agent's health: green, purple below 200, red below 100.
inline std::string_view HealthColour(double health) {
  if (health < 100.0) return "red";
  if (health < 200.0) return "purple";
  return "green";
}

class Simulation {
 public:
  // `series` must hold one tick series per region district (any order).
  // `region` and `series` are referenced, not copied, and must outlive the
  // simulation.
  Simulation(Region&&, std::vector<AgentSpec>, const std::vector<TickSeries>&, HealthParams,
             std::uint64_t, std::uint32_t = kDefaultMaxTicks) = delete;
  Simulation(const Region&, std::vector<AgentSpec>, std::vector<TickSeries>&&, HealthParams,
             std::uint64_t, std::uint32_t = kDefaultMaxTicks) = delete;
  Simulation(const Region& region, std::vector<AgentSpec> agents,
             const std::vector<TickSeries>& series, HealthParams params, std::uint64_t seed,
             std::uint32_t max_ticks = kDefaultMaxTicks)
      : region_(&region),
        specs_(std::move(agents)),
        params_(std::move(params)),
        max_ticks_(max_ticks),
        rng_(MakeRng(seed, Stream::kMovement)) {
    params_.Validate();
    Require(max_ticks_ > 0, ErrorKind::kValidation, "max_ticks must be positive");
    series_.resize(region.worlds.size(), nullptr);
    for (const auto& s : series) {
      const auto idx = region.index_of(s.district_id);
      if (!idx) continue;
      Require(s.tick0_kind == TickKind::kWork, ErrorKind::kConfiguration,
              s.district_id + ": tick series must start with a work tick");
      series_[*idx] = &s;
    }
    for (std::size_t d = 0; d < series_.size(); ++d)
      Require(series_[d] != nullptr, ErrorKind::kConfiguration,
              "no PM10 series for district '" + region.worlds[d].district_id + "'");

    state_.resize(specs_.size());
    plan_.resize(specs_.size());
    road_.assign(specs_.size(), 0);
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const AgentSpec& a = specs_[i];
      const auto home_d = region.index_of(a.home_district);
      Require(home_d.has_value(), ErrorKind::kConfiguration,
              "agent " + std::to_string(a.id) + ": unknown district " + a.home_district);
      const World& home_world = region.worlds[*home_d];
      const Cell& home = home_world.cells.at(a.home_cell);
      Require(home.land_class == LandClass::kResidential, ErrorKind::kValidation,
              "agent " + std::to_string(a.id) + ": home cell is not residential");
      Plan& p = plan_[i];
      p.home = {*home_d, a.home_cell};
      p.work = p.home;
      if (a.work_cell) {
        const auto work_d = region.index_of(a.work_district);
        Require(work_d.has_value(), ErrorKind::kConfiguration,
                "agent " + std::to_string(a.id) + ": unknown work district");
        p.work = {*work_d, *a.work_cell};
      }
      p.group = a.group;
      p.bin = static_cast<std::uint8_t>(a.age_bin);
      p.assessed = !a.cross_district;
      p.loss_rate = params_.alpha * params_.eta_of(a.group);
      p.recovery = params_.recovery.at(home.price_grade);
      if (a.group != AgeGroup::kActive) {
        const double r = a.group == AgeGroup::kYoung ? kYoungRadius : kOldRadius;
        p.day_first = static_cast<std::uint32_t>(day_cells_.size());
        auto cells = NeighborsWithin(home_world, a.home_cell, r);
        day_cells_.insert(day_cells_.end(), cells.begin(), cells.end());
        p.day_count = static_cast<std::uint32_t>(cells.size());
      }
      state_[i].health = params_.h_max;
      state_[i].current = p.home;
      if (p.assessed) {
        ++result_.assessed[static_cast<std::size_t>(p.group)];
        ++result_.assessed[kAllGroups];
      }
    }
    result_.at_risk.reserve(max_ticks_);
    result_.mean_health.reserve(max_ticks_);
  }

  std::uint32_t tick() const { return tick_; }
  bool finished() const { return finished_; }
  const HealthParams& params() const { return params_; }
  const std::vector<AgentSpec>& agents() const { return specs_; }
  const std::vector<AgentState>& states() const { return state_; }
  std::vector<AgentState>& mutable_states() { return state_; }
  const RunResult& result() const { return result_; }
  const Region& region() const { return *region_; }

  // Tick 0 is the work tick of day 1.
  static TickKind KindOf(std::uint32_t tick) {
    return tick % 2 == 0 ? TickKind::kWork : TickKind::kHome;
  }

  const Cell& cell_of(const CellRef& ref) const {
    return region_->worlds[ref.district].cells[ref.cell];
  }

  // Work tick: active agents go to their work cell; young and old agents to a
  // uniformly drawn walkable cell within radius 3 or 1 of home. Home tick:
  // everyone returns home. Hospitalized agents stay put. A day cell is drawn
  // for every young and old agent on every work tick, hospitalized or not, so
  // the movement stream does not depend on health.
  void Move(TickKind kind) {
    for (std::size_t i = 0; i < state_.size(); ++i) {
      const Plan& p = plan_[i];
      AgentState& s = state_[i];
      CellRef target = p.home;
      if (kind == TickKind::kWork) {
        if (p.group == AgeGroup::kActive) {
          target = p.work;
        } else if (p.day_count > 0) {
          const auto k = UniformIndex(rng_, p.day_count);
          target = {p.home.district, day_cells_[p.day_first + k]};
        }
      }
      if (!s.hospitalized()) {
        s.current = target;
        road_[i] = cell_of(target).is_road;
      }
    }
  }

  // Executes one tick. Returns false once the run has stopped.
  bool Step() {
    if (finished_) return false;
    const std::uint32_t t = tick_;
    for (std::size_t d = 0; d < series_.size(); ++d)
      Require(t < series_[d]->size(), ErrorKind::kConfiguration,
              series_[d]->district_id + ": PM10 series exhausted at tick " + std::to_string(t));
    Move(KindOf(t));

    background_.resize(series_.size());
    for (std::size_t d = 0; d < series_.size(); ++d) background_[d] = series_[d]->values[t];

    GroupCounts at_risk{};
    double health_sum = 0.0;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      const Plan& p = plan_[i];
      AgentState& s = state_[i];
      if (!s.hospitalized()) {
        const double bg = background_[s.current.district];
        const double pm10 = road_[i] ? bg * params_.road_multiplier : bg;
        s.health = UpdateHealth(s.health, pm10, p.loss_rate, p.recovery, params_);
      }
      if (HospitalizeCheck(s, params_)) ++result_.admissions_by_bin[p.bin];
      if (p.assessed) {
        health_sum += s.health;
        if (s.hospitalized() || s.health < params_.at_risk_health) {
          ++at_risk[static_cast<std::size_t>(p.group)];
          ++at_risk[kAllGroups];
        }
      }
    }
    result_.at_risk.push_back(at_risk);
    const auto assessed = result_.assessed[kAllGroups];
    result_.mean_health.push_back(assessed ? health_sum / assessed : 0.0);

    tick_ = t + 1;
    result_.final_tick = tick_;
    if (assessed > 0 && at_risk[kAllGroups] == assessed) {
      result_.stop_cause = StopCause::kAllAtRisk;
      finished_ = true;
    } else if (tick_ >= max_ticks_) {
      result_.stop_cause = StopCause::kMaxTicks;
      finished_ = true;
    }
    return !finished_;
  }

  RunResult Run() {
    Require(result_.assessed[kAllGroups] > 0, ErrorKind::kUndefinedRate,
            "no assessed agents: every agent commutes across districts or none exist");
    while (Step()) {
    }
    return result_;
  }

  // Share of assessed agents below the at-risk health level (hospitalized
  // agents count as at risk).
  double AtRiskRate() const {
    std::uint32_t n = 0, risk = 0;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      if (!plan_[i].assessed) continue;
      ++n;
      if (state_[i].hospitalized() || state_[i].health < params_.at_risk_health) ++risk;
    }
    Require(n > 0, ErrorKind::kUndefinedRate, "at-risk rate undefined: no assessed agents");
    return static_cast<double>(risk) / n;
  }

 private:
  struct Plan {
    CellRef home;
    CellRef work;
    AgeGroup group = AgeGroup::kActive;
    std::uint8_t bin = 0;
    bool assessed = true;
    double loss_rate = 0.0;
    double recovery = 0.0;
    std::uint32_t day_first = 0;
    std::uint32_t day_count = 0;
  };

  const Region* region_;
  std::vector<AgentSpec> specs_;
  HealthParams params_;
  std::uint32_t max_ticks_;
  Rng rng_;
  std::vector<const TickSeries*> series_;
  std::vector<AgentState> state_;
  std::vector<Plan> plan_;
  std::vector<CellIndex> day_cells_;
  std::vector<double> background_;
  std::vector<std::uint8_t> road_;  // is_road of each agent's current cell
  RunResult result_;
  std::uint32_t tick_ = 0;
  bool finished_ = false;
};

// ---------------------------------------------------------------------------
// Output formats

inline std::string FormatTrajectoryCsv(const RunResult& r) {
  std::string out = "tick,group,at_risk_count,at_risk_rate\n";
  for (std::size_t t = 0; t < r.at_risk.size(); ++t) {
    for (std::size_t g = 0; g <= kAllGroups; ++g) {
      out += std::to_string(t) + "," + std::string(GroupColumnName(g)) + "," +
             std::to_string(r.at_risk[t][g]) + "," + csv::FormatDouble(r.rate(t, g)) + "\n";
    }
  }
  return out;
}

inline std::string FormatAdmissionsCsv(const RunResult& r) {
  std::string out = "age_bin,count\n";
  for (int b = 0; b < kAgeBinCount; ++b)
    out += AgeBinLabel(b) + "," + std::to_string(r.admissions_by_bin[static_cast<std::size_t>(b)]) +
           "\n";
  return out;
}

inline std::string FormatSnapshotCsv(const Simulation& sim) {
  std::string out = "id,district,age_bin,group,cross_district,health,status,admissions,colour\n";
  const auto& specs = sim.agents();
  const auto& states = sim.states();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& a = specs[i];
    const auto& s = states[i];
    out += std::to_string(a.id) + "," + a.home_district + "," + AgeBinLabel(a.age_bin) + "," +
           std::string(ToString(a.group)) + "," + (a.cross_district ? "1" : "0") + "," +
           csv::FormatDouble(s.health) + "," + (s.hospitalized() ? "hospitalized" : "active") +
           "," + std::to_string(s.admissions) + "," + std::string(HealthColour(s.health)) + "\n";
  }
  return out;
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_DYNAMICS_HPP_
