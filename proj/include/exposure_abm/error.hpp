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

#ifndef EXPOSURE_ABM_ERROR_HPP_
#define EXPOSURE_ABM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace exposure_abm {

enum class ErrorKind {
  kValidation,
  kParse,
  kUnusableSeries,
  kMustImputeFirst,
  kConfiguration,
  kUndefinedRate,
  kCalibrationFailed,
  kRuntime,
};

constexpr std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kUnusableSeries: return "unusable_series";
    case ErrorKind::kMustImputeFirst: return "must_impute_first";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kUndefinedRate: return "undefined_rate";
    case ErrorKind::kCalibrationFailed: return "calibration_failed";
    case ErrorKind::kRuntime: return "runtime";
  }
  return "unknown";
}

// All library failures are reported through this one exception type; the
// kind decides how callers (notably the CLI exit code) react.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) Fail(kind, message);
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_ERROR_HPP_
