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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "uapkit/audio.hpp"

namespace uapkit {

// Sidecar written next to a perturbation WAV as "<wav>.json".
struct PerturbationMeta {
  double lambda_raw = 0.0;
  double length_seconds = 0.0;
  int sample_rate = kDefaultSampleRate;
  std::string config_hash;  // 16 hex digits, empty for hand-made perturbations
  std::string kind;         // "crafted", "random-integer", "random-edge", "scaled"
};

std::filesystem::path sidecar_path(const std::filesystem::path& wav);

void save_perturbation(const Perturbation& delta, const PerturbationMeta& meta,
                       const std::filesystem::path& wav);

// Reads the WAV and, when present, its sidecar. Without a sidecar the bound is
// taken as the clip's own l-infinity norm in raw units.
Perturbation load_perturbation(const std::filesystem::path& wav, PerturbationMeta* meta = nullptr);

// 64-bit FNV-1a rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace uapkit
