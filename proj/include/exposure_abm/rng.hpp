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

#ifndef EXPOSURE_ABM_RNG_HPP_
#define EXPOSURE_ABM_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace exposure_abm {

using Rng = std::mt19937_64;

// Independent sub-streams of one run seed. Values are part of the
// reproducibility contract: changing them changes every published result.
enum class Stream : std::uint64_t {
  kSynthesis = 1,
  kPlacement = 2,
  kMovement = 3,
  kFixtures = 4,
};

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, Stream stream,
                                   std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(seed ^ SplitMix64(static_cast<std::uint64_t>(stream))) +
                    index);
}

inline Rng MakeRng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

// Uniform index in [0, n). n must be positive.
inline std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace exposure_abm

#endif  // EXPOSURE_ABM_RNG_HPP_
