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
#include <vector>

#include "uapkit/audio.hpp"
#include "uapkit/topics.hpp"

namespace uapkit {

// Tone-coded stand-in for speech. Each alphabet symbol is rendered as a pair
// of sinusoids (one from a low group, one from a high group, DTMF style) with
// short raised-cosine ramps, separated by brief pauses. A "speaker" is a pitch
// scale, a speaking rate, a level and a background-noise floor.
struct SynthVoice {
  std::string speaker_id;
  double pitch_scale = 1.0;
  double char_seconds = 0.080;
  double gap_seconds = 0.025;
  double amplitude = 0.1;
  double noise_rms = 0.002;
};

std::vector<SynthVoice> default_voices();

// Low and high tone (Hz, before pitch scaling) of a symbol index.
std::pair<double, double> symbol_tones(int symbol);

struct SynthOptions {
  double leading_silence = 0.2;
  double total_seconds = 0.0;  // pad with trailing silence up to this length; 0 = natural length
  bool background_noise = true;
};

// Renders already-normalized text. Deterministic in (text, voice, seed, options).
AudioClip synthesize_speech(std::string_view text, const SynthVoice& voice, std::uint64_t seed,
                            const SynthOptions& opts = {});

// Upper bound on the rendered duration of `text` (jitter included).
double speech_seconds_upper_bound(std::string_view text, const SynthVoice& voice);

// Draws words from `topic`'s keywords, one other topic and a filler list
// until the next word would push speech past `max_speech_seconds`.
std::string compose_text(const TopicModel& topics, const std::string& topic, const SynthVoice& voice,
                         double max_speech_seconds, std::uint64_t seed);

// Short utterances for training the surrogate. Long clips train poorly: few
// optimizer steps per epoch and a slow escape from the all-blank solution.
struct TrainingSetOptions {
  int utterances = 400;
  int max_words = 4;
  double noiseless_fraction = 0.25;  // share rendered without background noise
  std::uint64_t seed = 7;
};

struct SynthUtterance {
  AudioClip clip;
  std::string text;
  std::string speaker_id;
};

std::vector<SynthUtterance> synthesize_training_set(const TopicModel& topics, const TrainingSetOptions& opts = {});

struct SynthCorpusOptions {
  int craft_clips = 16;
  int eval_clips = 16;
  int train_utterances = 400;  // 0 skips the train split
  double craft_seconds = 9.3;
  double eval_seconds_min = 9.5;
  double eval_seconds_step = 1.5;  // eval lengths cycle over 4 steps
  std::uint64_t seed = 2024;
};

struct SynthCorpusPaths {
  std::filesystem::path craft_manifest;
  std::filesystem::path eval_manifest;
  std::filesystem::path train_manifest;  // empty when no train split was written
};

// Writes WAVs, transcripts and manifests (craft.tsv, eval.tsv and, unless
// disabled, train.tsv) under dir.
SynthCorpusPaths write_synthetic_corpus(const std::filesystem::path& dir, const TopicModel& topics,
                                        const SynthCorpusOptions& opts = {});

}  // namespace uapkit
