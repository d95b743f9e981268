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

// Hourly PM10 ingestion, gap filling, half-day aggregation and the
// business-as-usual / increasing projections of the observed years.

#ifndef EXPOSURE_ABM_POLLUTION_HPP_
#define EXPOSURE_ABM_POLLUTION_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exposure_abm/csv.hpp"
#include "exposure_abm/error.hpp"
#include "exposure_abm/kalman.hpp"

namespace exposure_abm {

using Hour = std::chrono::sys_time<std::chrono::hours>;

enum class TickKind { kWork, kHome };

constexpr std::string_view ToString(TickKind k) {
  return k == TickKind::kWork ? "work" : "home";
}

struct HourlySeries {
  std::string district_id;
  Hour start{};
  std::vector<std::optional<double>> values;

  bool complete() const {
    for (const auto& v : values)
      if (!v) return false;
    return true;
  }
  std::size_t missing() const {
    std::size_t n = 0;
    for (const auto& v : values) n += v ? 0 : 1;
    return n;
  }
};

struct TickSeries {
  std::string district_id;
  std::vector<double> values;
  TickKind tick0_kind = TickKind::kWork;

  std::size_t size() const { return values.size(); }
  TickKind kind(std::size_t tick) const {
    const bool same = tick % 2 == 0;
    if (tick0_kind == TickKind::kWork) return same ? TickKind::kWork : TickKind::kHome;
    return same ? TickKind::kHome : TickKind::kWork;
  }
};

// Work hours are 09:00-19:00 of a day (11 values); the home window runs from
// 20:00 of the same day to 08:00 of the next (13 values).
inline constexpr int kWorkFirstHour = 9;
inline constexpr int kWorkLastHour = 19;
inline constexpr int kHomeFirstHour = 20;
inline constexpr int kHomeHours = 13;
// Gaps longer than a week are filled seasonal-naive instead of smoothed.
inline constexpr std::size_t kLongGapHours = 168;

enum class Season { kWinter, kSpring, kSummer, kAutumn };

constexpr std::string_view ToString(Season s) {
  switch (s) {
    case Season::kWinter: return "winter";
    case Season::kSpring: return "spring";
    case Season::kSummer: return "summer";
    case Season::kAutumn: return "autumn";
  }
  return "?";
}

constexpr Season MeteorologicalSeason(unsigned month) {
  if (month == 12 || month <= 2) return Season::kWinter;
  if (month <= 5) return Season::kSpring;
  if (month <= 8) return Season::kSummer;
  return Season::kAutumn;
}

// Maps ticks of the simulated horizon (the observed days replayed `copies`
// times) to year, season label and contiguous season index. A winter that
// straddles a replay boundary (Dec of the last observed year, Jan-Feb of the
// first replayed year) is one season.
class SeasonCalendar {
 public:
  SeasonCalendar() = default;

  static SeasonCalendar Build(std::chrono::sys_days start, std::size_t observed_days,
                              std::size_t copies = 2) {
    using namespace std::chrono;
    Require(observed_days > 0 && copies > 0, ErrorKind::kValidation,
            "season calendar needs at least one day and one copy");
    SeasonCalendar cal;
    cal.observed_days_ = observed_days;
    const year_month_day first{start};
    const year_month_day after{start + days{static_cast<int>(observed_days)}};
    const int years_per_copy =
        std::max(1, static_cast<int>(after.year()) - static_cast<int>(first.year()));
    const std::size_t n = 2 * observed_days * copies;
    cal.year_.resize(n);
    cal.season_.resize(n);
    cal.label_.resize(n);
    std::uint32_t index = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t copy = t / (2 * observed_days);
      const std::size_t day = (t / 2) % observed_days;
      const year_month_day ymd{start + days{static_cast<int>(day)}};
      const Season s = MeteorologicalSeason(static_cast<unsigned>(ymd.month()));
      if (t > 0 && s != cal.label_[t - 1]) ++index;
      cal.label_[t] = s;
      cal.season_[t] = index;
      cal.year_[t] = static_cast<std::uint16_t>(
          static_cast<int>(ymd.year()) - static_cast<int>(first.year()) +
          static_cast<int>(copy) * years_per_copy);
    }
    return cal;
  }

  // 2010-01-01 .. 2015-12-31 replayed twice: 8764 ticks.
  static SeasonCalendar Default() {
    using namespace std::chrono;
    const sys_days start{year{2010} / January / 1};
    const sys_days end{year{2016} / January / 1};
    return Build(start, static_cast<std::size_t>((end - start).count()), 2);
  }

  std::size_t size() const { return label_.size(); }
  std::size_t observed_days() const { return observed_days_; }
  std::size_t observed_ticks() const { return 2 * observed_days_; }
  std::uint16_t year_index(std::size_t t) const { return year_.at(t); }
  std::uint32_t season_index(std::size_t t) const { return season_.at(t); }
  Season label(std::size_t t) const { return label_.at(t); }
  std::uint32_t season_count() const { return label_.empty() ? 0 : season_.back() + 1; }

  // Ordinal of the projected season containing tick t: 0 for observed ticks
  // and for a season already running when the projection starts, then 1, 2,
  // ... for each season that begins inside the projection.
  std::uint32_t projected_season(std::size_t t) const {
    const std::size_t start = observed_ticks();
    if (t < start || start >= size()) return 0;
    const std::uint32_t s0 = season_[start];
    const bool fresh = season_[start - 1] != s0;
    return season_.at(t) - s0 + (fresh ? 1u : 0u);
  }

 private:
  std::size_t observed_days_ = 0;
  std::vector<std::uint16_t> year_;
  std::vector<std::uint32_t> season_;
  std::vector<Season> label_;
};

namespace detail {

inline void ValidateHourly(const HourlySeries& series) {
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const auto& v = series.values[i];
    if (!v) continue;
    Require(std::isfinite(*v), ErrorKind::kValidation,
            series.district_id + ": non-finite PM10 at hour " + std::to_string(i));
    Require(*v >= 0.0, ErrorKind::kValidation,
            series.district_id + ": negative PM10 at hour " + std::to_string(i));
  }
}

}  // namespace detail

// Fills missing hours. Present values are returned untouched; gaps up to a
// week take the smoothed level of a local-level model fitted by maximum
// likelihood, longer gaps repeat the same hour of the previous week.
inline HourlySeries Impute(const HourlySeries& series) {
  detail::ValidateHourly(series);
  const std::size_t n = series.values.size();
  const std::size_t missing = series.missing();
  if (missing == 0) return series;
  Require(n - missing >= 2, ErrorKind::kUnusableSeries,
          series.district_id + ": fewer than two observed hours");
  Require(2 * missing < n, ErrorKind::kUnusableSeries,
          series.district_id + ": half or more of the hours are missing");

  const auto fit = kalman::FitLocalLevel(series.values);
  const auto smoothed = kalman::SmoothLocalLevel(series.values, fit.q);

  HourlySeries out = series;
  std::size_t t = 0;
  while (t < n) {
    if (series.values[t]) {
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < n && !series.values[end]) ++end;
    const bool long_gap = end - t > kLongGapHours;
    for (std::size_t i = t; i < end; ++i) {
      double v = smoothed[i];
      if (long_gap && i >= kLongGapHours) v = *out.values[i - kLongGapHours];
      out.values[i] = std::max(0.0, v);
    }
    t = end;
  }
  return out;
}

inline TickSeries AggregateToTicks(const HourlySeries& series) {
  Require(series.complete(), ErrorKind::kMustImputeFirst,
          series.district_id + ": series has missing hours; impute first");
  const auto since_midnight =
      series.start - std::chrono::floor<std::chrono::days>(series.start);
  Require(since_midnight.count() == 0, ErrorKind::kValidation,
          series.district_id + ": series must start at 00:00");
  detail::ValidateHourly(series);

  TickSeries ticks;
  ticks.district_id = series.district_id;
  ticks.tick0_kind = TickKind::kWork;
  const std::size_t n = series.values.size();
  for (std::size_t day = 0;; ++day) {
    const std::size_t base = 24 * day;
    if (base + kWorkLastHour >= n) break;
    double work = 0.0;
    for (int h = kWorkFirstHour; h <= kWorkLastHour; ++h) work += *series.values[base + h];
    ticks.values.push_back(work / (kWorkLastHour - kWorkFirstHour + 1));

    const std::size_t home_first = base + kHomeFirstHour;
    const std::size_t home_end = std::min(n, home_first + kHomeHours);
    if (home_first >= home_end) break;
    double home = 0.0;
    for (std::size_t i = home_first; i < home_end; ++i) home += *series.values[i];
    ticks.values.push_back(home / static_cast<double>(home_end - home_first));
  }
  return ticks;
}

inline TickSeries ProjectBau(const TickSeries& base, const SeasonCalendar& calendar) {
  Require(base.size() == calendar.observed_ticks(), ErrorKind::kValidation,
          base.district_id + ": base has " + std::to_string(base.size()) +
              " ticks, observed span needs " + std::to_string(calendar.observed_ticks()));
  TickSeries out = base;
  out.values.reserve(2 * base.size());
  out.values.insert(out.values.end(), base.values.begin(), base.values.end());
  return out;
}

// Replays the base and scales every tick of the k-th projected season by
// (1 + rate)^k.
inline TickSeries ProjectInc(const TickSeries& base, const SeasonCalendar& calendar,
                             double rate = 0.03) {
  Require(rate > -1.0 && std::isfinite(rate), ErrorKind::kValidation,
          "increase rate must be finite and > -1");
  TickSeries out = ProjectBau(base, calendar);
  Require(calendar.size() >= out.size(), ErrorKind::kValidation,
          "season calendar shorter than the projected horizon");
  for (std::size_t t = base.size(); t < out.size(); ++t) {
    const auto k = calendar.projected_season(t);
    if (k > 0) out.values[t] *= std::pow(1.0 + rate, static_cast<double>(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV I/O

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH", "YYYY-MM-DDTHH:MM" and
// "YYYY-MM-DD HH:MM:SS"; minutes and seconds must be zero.
inline std::optional<Hour> ParseIsoHour(std::string_view s) {
  using namespace std::chrono;
  auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  int hour = 0;
  if (s.size() > 10) {
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    auto h = digits(11, 2);
    if (!h || *h > 23) return std::nullopt;
    hour = *h;
    std::size_t pos = 13;
    while (pos < s.size()) {
      if (s[pos] != ':') return std::nullopt;
      auto mm = digits(pos + 1, 2);
      if (!mm || *mm != 0) return std::nullopt;
      pos += 3;
    }
  }
  return Hour{sys_days{ymd}} + hours{hour};
}

inline std::string FormatIsoHour(Hour h) {
  using namespace std::chrono;
  const auto day = floor<days>(h);
  const year_month_day ymd{day};
  const auto hh = (h - day).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hh));
  return buf;
}

inline HourlySeries ParseHourlyCsv(const csv::Table& table, std::string district_id) {
  const auto ts_col = table.RequireColumn("timestamp");
  const auto pm_col = table.RequireColumn("pm10");
  HourlySeries series;
  series.district_id = std::move(district_id);
  series.values.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = csv::Where(table, row);
    const auto ts = ParseIsoHour(row.fields[ts_col]);
    if (!ts) Fail(ErrorKind::kParse, where + ": bad timestamp '" + row.fields[ts_col] + "'");
    if (i == 0) {
      series.start = *ts;
    } else if (*ts != series.start + std::chrono::hours{static_cast<long>(i)}) {
      Fail(ErrorKind::kParse, where + ": timestamps must be consecutive hours");
    }
    const auto& cell = row.fields[pm_col];
    if (cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN") {
      series.values.emplace_back(std::nullopt);
    } else {
      series.values.emplace_back(csv::ParseDouble(cell, where));
    }
  }
  return series;
}

inline HourlySeries ReadHourlyCsv(const std::filesystem::path& path, std::string district_id) {
  return ParseHourlyCsv(csv::ReadFileTable(path), std::move(district_id));
}

inline std::string FormatHourlyCsv(const HourlySeries& series) {
  std::string out = "timestamp,pm10\n";
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out += FormatIsoHour(series.start + std::chrono::hours{static_cast<long>(i)});
    out += ',';
    if (series.values[i]) out += csv::FormatDouble(*series.values[i]);
    out += '\n';
  }
  return out;
}

inline std::string FormatTickCsv(const TickSeries& ticks) {
  std::string out = "tick,kind,pm10\n";
  for (std::size_t t = 0; t < ticks.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    out += ToString(ticks.kind(t));
    out += ',';
    out += csv::FormatDouble(ticks.values[t]);
    out += '\n';
  }
  return out;
}

inline TickSeries ParseTickCsv(const csv::Table& table, std::string district_id) {
  const auto tick_col = table.RequireColumn("tick");
  const auto kind_col = table.RequireColumn("kind");
  const auto pm_col = table.RequireColumn("pm10");
  TickSeries ticks;
  ticks.district_id = std::move(district_id);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = csv::Where(table, row);
    if (csv::ParseInt(row.fields[tick_col], where) != static_cast<std::int64_t>(i))
      Fail(ErrorKind::kParse, where + ": ticks must be numbered 0, 1, 2, ...");
    const auto& kind = row.fields[kind_col];
    if (kind != "work" && kind != "home")
      Fail(ErrorKind::kParse, where + ": kind must be work or home");
    if (i == 0) ticks.tick0_kind = kind == "work" ? TickKind::kWork : TickKind::kHome;
    if (ToString(ticks.kind(i)) != kind)
      Fail(ErrorKind::kParse, where + ": tick kinds must alternate");
    const double v = csv::ParseDouble(row.fields[pm_col], where);
    Require(std::isfinite(v) && v >= 0.0, ErrorKind::kValidation,
            where + ": PM10 must be finite and non-negative");
    ticks.values.push_back(v);
  }
  return ticks;
}

inline TickSeries ReadTickCsv(const std::filesystem::path& path, std::string district_id) {
  return ParseTickCsv(csv::ReadFileTable(path), std::move(district_id));
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_POLLUTION_HPP_
