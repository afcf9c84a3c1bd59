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

#include "uapkit/perturbation_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "uapkit/errors.hpp"

namespace uapkit {

std::filesystem::path sidecar_path(const std::filesystem::path& wav) {
  auto p = wav;
  p += ".json";
  return p;
}

void save_perturbation(const Perturbation& delta, const PerturbationMeta& meta,
                       const std::filesystem::path& wav) {
  // Half a 16-bit step of slack: the file stores rounded samples.
  if (norm_to_raw(linf_norm(delta.clip.samples)) > delta.lambda_raw + 0.5) {
    throw ArgumentError("save_perturbation: samples exceed lambda");
  }
  write_wav(delta.clip, wav);
  nlohmann::ordered_json j;
  j["format"] = "uapkit-perturbation";
  j["version"] = 1;
  j["kind"] = meta.kind;
  j["lambda_raw"] = delta.lambda_raw;
  j["length_seconds"] = delta.clip.seconds();
  j["sample_rate"] = delta.clip.sample_rate;
  j["samples"] = delta.clip.size();
  j["config_hash"] = meta.config_hash;
  std::ofstream out(sidecar_path(wav));
  if (!out) throw IoError("cannot write " + sidecar_path(wav).string());
  out << j.dump(2) << '\n';
}

Perturbation load_perturbation(const std::filesystem::path& wav, PerturbationMeta* meta) {
  Perturbation delta;
  delta.clip = read_wav(wav);
  PerturbationMeta m;
  m.sample_rate = delta.clip.sample_rate;
  m.length_seconds = delta.clip.seconds();
  const auto side = sidecar_path(wav);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    nlohmann::json j;
    try {
      in >> j;
      m.lambda_raw = j.at("lambda_raw").get<double>();
      m.kind = j.value("kind", "");
      m.config_hash = j.value("config_hash", "");
      if (j.at("sample_rate").get<int>() != delta.clip.sample_rate) {
        throw FormatError(side.string() + ": sample rate disagrees with WAV header");
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(side.string() + ": " + e.what());
    }
  } else {
    m.lambda_raw = std::round(norm_to_raw(linf_norm(delta.clip.samples)));
  }
  delta.lambda_raw = m.lambda_raw;
  if (meta != nullptr) *meta = m;
  return delta;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace uapkit
