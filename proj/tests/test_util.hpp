// Copyright 2026 The uapkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "uapkit/audio.hpp"

namespace uapkit::testing {

inline std::vector<double> random_samples(std::size_t n, std::uint64_t seed, double amplitude = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline AudioClip random_clip(std::size_t n, std::uint64_t seed, double amplitude = 0.3) {
  return AudioClip(random_samples(n, seed, amplitude));
}

// |a - b| relative to the larger magnitude, with a floor so coordinates whose
// true derivative is ~0 are compared absolutely against `floor`.
inline double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace uapkit::testing
