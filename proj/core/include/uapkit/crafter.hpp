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
#include <span>
#include <string>
#include <vector>

#include "uapkit/asr.hpp"
#include "uapkit/audio.hpp"

namespace uapkit {

enum class CraftOptimizer { kSign, kAdam };

// Hyperparameters of the universal perturbation search. Amplitudes and step
// sizes are in raw 16-bit units.
struct CraftConfig {
  double l_seconds = 3.0;
  int k = 3;
  double lambda_raw = 100.0;
  double c = 1e-4;
  double alpha_init = 10.0;
  int epochs = 100;
  int batch_size = 16;
  int patience = 10;  // batches without a new best objective before alpha -= 1
  std::uint64_t seed = 1;
  int sample_rate = kDefaultSampleRate;
  CraftOptimizer optimizer = CraftOptimizer::kSign;

  std::size_t delta_samples() const noexcept;
  std::size_t crop_samples() const noexcept { return delta_samples() * static_cast<std::size_t>(k); }
  double crop_seconds() const noexcept { return l_seconds * k; }
  void validate() const;

  // Stable textual form; hashed into perturbation sidecars.
  std::string canonical() const;
  std::string hash() const;
};

// One crafting clip with the reference labels the perturbation must move
// away from: the model's own greedy transcript of the clean audio.
struct CraftSample {
  AudioClip clip;
  std::vector<int> reference;  // empty when the clean transcript was empty
  std::string reference_text;
};

// Crops every clip to cfg.crop_samples() and decodes the clean reference.
std::vector<CraftSample> prepare_craft_samples(const SurrogateAsr& model, std::span<const AudioClip> clips,
                                               const CraftConfig& cfg);

struct ObjectiveResult {
  double value = 0.0;        // -mean CTC + c * ||delta||_2
  double ctc_term = 0.0;     // mean CTC loss over the clips that were used
  std::vector<double> grad;  // d value / d delta, raw units, length l * rate
  std::size_t used = 0;
  std::size_t skipped = 0;   // empty reference or no admissible CTC path
};

// delta_raw is the l-second perturbation in raw units. Gradients of the k
// tiled copies are folded back onto the window by summation.
ObjectiveResult objective(const SurrogateAsr& model, std::span<const CraftSample> batch,
                          std::span<const double> delta_raw, double c, int k);

struct EpochRecord {
  int epoch = 0;
  double objective = 0.0;  // mean batch objective
  double ctc_term = 0.0;   // mean batch CTC term
  double l2_norm = 0.0;    // ||delta||_2 after clipping, raw units
  double linf = 0.0;       // ||delta||_inf after clipping, raw units
  double alpha = 0.0;
  double probe_wer = 0.0;  // NaN without a probe set
};

struct CraftReport {
  std::vector<EpochRecord> epochs;
  std::size_t skipped_clips = 0;
  std::size_t alpha_decays = 0;
  bool untrained_warning = false;
  std::string config_hash;

  std::string csv() const;
  std::string json_summary(const CraftConfig& cfg) const;
};

struct CraftOutcome {
  Perturbation delta;
  CraftReport report;
};

// Sign-gradient search: ascend the CTC term batch by batch, decay the step
// when the objective stalls, clip to [-lambda, lambda] after every epoch.
CraftOutcome craft(const SurrogateAsr& model, std::span<const CraftSample> corpus, const CraftConfig& cfg,
                   std::span<const CraftSample> probe = {});

// Mean WER of the probe references against the model's output on x + delta^k.
double probe_wer(const SurrogateAsr& model, std::span<const CraftSample> probe, const AudioClip& delta);

// Baselines: uniform integers in [-lambda, lambda], or uniform over {-lambda, +lambda}.
Perturbation random_integer_perturbation(double lambda_raw, double l_seconds, std::uint64_t seed,
                                         int sample_rate = kDefaultSampleRate);
Perturbation random_edge_perturbation(double lambda_raw, double l_seconds, std::uint64_t seed,
                                      int sample_rate = kDefaultSampleRate);

}  // namespace uapkit
