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

// Local-level state-space model:
//
//   y[t]     = level[t] + eps[t],     eps ~ N(0, s2)
//   level[t] = level[t-1] + eta[t],   eta ~ N(0, q * s2)
//
// Everything runs in units of the observation variance s2, which is
// concentrated out of the likelihood, so the only free parameter is the
// signal-to-noise ratio q. The level is initialised diffusely at the first
// present observation.

#ifndef EXPOSURE_ABM_KALMAN_HPP_
#define EXPOSURE_ABM_KALMAN_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace exposure_abm::kalman {

using Observations = std::span<const std::optional<double>>;

struct LocalLevelFit {
  double q = 1.0;             // level variance / observation variance
  double obs_variance = 0.0;  // concentrated ML estimate of s2
  double log_likelihood = 0.0;
  bool degenerate = false;    // every one-step prediction error was zero
};

namespace detail {

inline std::optional<std::size_t> FirstPresent(Observations y) {
  for (std::size_t t = 0; t < y.size(); ++t)
    if (y[t]) return t;
  return std::nullopt;
}

struct FilterPass {
  std::vector<double> level;  // filtered mean a[t|t]
  std::vector<double> var;    // filtered variance P[t|t] (units of s2)
  double sum_scaled_sq = 0.0; // sum v^2 / F
  double sum_log_f = 0.0;
  std::size_t innovations = 0;
};

inline FilterPass Filter(Observations y, std::size_t first, double q) {
  FilterPass f;
  f.level.assign(y.size(), 0.0);
  f.var.assign(y.size(), 0.0);
  f.level[first] = *y[first];
  f.var[first] = 1.0;
  for (std::size_t t = first + 1; t < y.size(); ++t) {
    const double a_pred = f.level[t - 1];
    const double p_pred = f.var[t - 1] + q;
    if (y[t]) {
      const double F = p_pred + 1.0;
      const double v = *y[t] - a_pred;
      const double gain = p_pred / F;
      f.level[t] = a_pred + gain * v;
      f.var[t] = p_pred / F;
      f.sum_scaled_sq += v * v / F;
      f.sum_log_f += std::log(F);
      ++f.innovations;
    } else {
      f.level[t] = a_pred;
      f.var[t] = p_pred;
    }
  }
  return f;
}

}  // namespace detail

// Concentrated log-likelihood (constant terms dropped). Returns +inf when all
// prediction errors vanish and -inf when fewer than two values are present.
inline double ConcentratedLogLikelihood(Observations y, double q) {
  const auto first = detail::FirstPresent(y);
  if (!first) return -std::numeric_limits<double>::infinity();
  const auto f = detail::Filter(y, *first, q);
  if (f.innovations == 0) return -std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(f.innovations);
  const double s2 = f.sum_scaled_sq / m;
  if (s2 <= 0.0) return std::numeric_limits<double>::infinity();
  return -0.5 * (m * std::log(s2) + f.sum_log_f);
}

// Maximum-likelihood q over [1e-6, 1e4]: coarse scan in log space, then
// golden-section refinement around the best grid point.
inline LocalLevelFit FitLocalLevel(Observations y) {
  LocalLevelFit fit;
  const auto first = detail::FirstPresent(y);
  if (!first) return fit;

  constexpr double kLo = -6.0 * 2.302585092994046;  // ln 1e-6
  constexpr double kHi = 4.0 * 2.302585092994046;   // ln 1e4
  constexpr int kGrid = 40;
  const double step = (kHi - kLo) / kGrid;

  auto objective = [&](double log_q) { return ConcentratedLogLikelihood(y, std::exp(log_q)); };

  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double ll = objective(kLo + step * i);
    if (std::isinf(ll) && ll > 0) {
      fit.degenerate = true;
      fit.q = 1.0;
      fit.obs_variance = 0.0;
      fit.log_likelihood = ll;
      return fit;
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }

  double a = kLo + step * std::max(best - 1, 0);
  double b = kLo + step * std::min(best + 1, kGrid);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int iter = 0; iter < 60 && (b - a) > 1e-6; ++iter) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
  }
  double log_q = 0.5 * (a + b);
  double ll = objective(log_q);
  if (best_ll > ll) {
    log_q = kLo + step * best;
    ll = best_ll;
  }
  fit.q = std::exp(log_q);
  fit.log_likelihood = ll;
  const auto f = detail::Filter(y, *first, fit.q);
  fit.obs_variance = f.innovations ? f.sum_scaled_sq / f.innovations : 0.0;
  return fit;
}

// Rauch-Tung-Striebel smoothed level for every index. Indices before the
// first present value take the smoothed level at that value.
inline std::vector<double> SmoothLocalLevel(Observations y, double q) {
  const auto first = detail::FirstPresent(y);
  std::vector<double> out(y.size(), 0.0);
  if (!first) return out;
  const auto f = detail::Filter(y, *first, q);
  const std::size_t n = y.size();
  out[n - 1] = f.level[n - 1];
  for (std::size_t t = n - 1; t-- > *first;) {
    const double p_pred_next = f.var[t] + q;
    const double j = f.var[t] / p_pred_next;
    out[t] = f.level[t] + j * (out[t + 1] - f.level[t]);
  }
  for (std::size_t t = 0; t < *first; ++t) out[t] = out[*first];
  return out;
}

}  // namespace exposure_abm::kalman

#endif  // EXPOSURE_ABM_KALMAN_HPP_
