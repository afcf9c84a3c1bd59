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

#include "uapkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "uapkit/alphabet.hpp"
#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

// Low group sits on mel filter centers between 300 Hz and 1 kHz, high group
// between 1.3 and 2.6 kHz (26-filter bank at 16 kHz).
constexpr std::array<double, 7> kLowTones = {290.0, 377.0, 470.0, 571.0, 679.0, 795.0, 920.0};
constexpr std::array<double, 4> kHighTones = {1355.0, 1703.0, 2106.0, 2573.0};
constexpr double kRampSeconds = 0.005;
constexpr double kDurationJitter = 0.10;
constexpr double kGapJitter = 0.20;
constexpr double kLevelJitter = 0.15;

constexpr std::array<const char*, 14> kFillers = {"the", "and", "we", "of", "to", "is", "that",
                                                   "it's", "don't", "this", "for", "with", "our", "they"};

std::string pick(const std::vector<std::string>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::vector<std::string> keywords_of(const TopicModel& topics, const std::string& name) {
  std::vector<std::string> out;
  const auto it = topics.topics.find(name);
  if (it == topics.topics.end()) throw ArgumentError("compose_text: unknown topic '" + name + "'");
  for (const auto& [kw, w] : it->second) out.push_back(kw);
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  out << text << '\n';
}

}  // namespace

std::vector<SynthVoice> default_voices() {
  return {
      {"spk1", 1.00, 0.080, 0.025, 0.10, 0.0020},
      {"spk2", 0.97, 0.090, 0.030, 0.14, 0.0015},
      {"spk3", 1.03, 0.075, 0.022, 0.08, 0.0025},
      {"spk4", 1.01, 0.085, 0.028, 0.12, 0.0010},
  };
}

std::pair<double, double> symbol_tones(int symbol) {
  if (symbol < 0 || symbol >= Alphabet::kBlank) throw ArgumentError("symbol_tones: not a symbol index");
  return {kLowTones[static_cast<std::size_t>(symbol % 7)], kHighTones[static_cast<std::size_t>(symbol / 7)]};
}

double speech_seconds_upper_bound(std::string_view text, const SynthVoice& voice) {
  return static_cast<double>(text.size()) *
         (voice.char_seconds * (1.0 + kDurationJitter) + voice.gap_seconds * (1.0 + kGapJitter));
}

AudioClip synthesize_speech(std::string_view text, const SynthVoice& voice, std::uint64_t seed,
                            const SynthOptions& opts) {
  const std::string norm = normalize_text(text);
  const double rate = kDefaultSampleRate;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<double> s(static_cast<std::size_t>(std::llround(opts.leading_silence * rate)), 0.0);
  const auto ramp = static_cast<std::size_t>(kRampSeconds * rate);
  for (char ch : norm) {
    const auto [lo, hi] = symbol_tones(Alphabet::index_of(ch));
    const double f1 = lo * voice.pitch_scale;
    const double f2 = hi * voice.pitch_scale;
    const double dur = voice.char_seconds * (1.0 + kDurationJitter * unit(rng));
    const double gap = voice.gap_seconds * (1.0 + kGapJitter * unit(rng));
    const double level = voice.amplitude * (1.0 + kLevelJitter * unit(rng)) / 1.8;
    const double p1 = phase(rng);
    const double p2 = phase(rng);
    const auto n = static_cast<std::size_t>(std::llround(dur * rate));
    for (std::size_t i = 0; i < n; ++i) {
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
      if (n - 1 - i < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / ramp));
      const double t = static_cast<double>(i) / rate;
      s.push_back(level * env *
                  (std::sin(2.0 * std::numbers::pi * f1 * t + p1) + 0.8 * std::sin(2.0 * std::numbers::pi * f2 * t + p2)));
    }
    s.resize(s.size() + static_cast<std::size_t>(std::llround(gap * rate)), 0.0);
  }
  if (opts.total_seconds > 0.0) {
    const auto total = static_cast<std::size_t>(std::llround(opts.total_seconds * rate));
    if (total < s.size()) {
      throw ArgumentError(fmt::format("synthesize_speech: text needs {:.2f} s, more than {:.2f} s",
                                      s.size() / rate, opts.total_seconds));
    }
    s.resize(total, 0.0);
  }
  if (opts.background_noise && voice.noise_rms > 0.0) {
    std::normal_distribution<double> noise(0.0, voice.noise_rms);
    for (double& v : s) v += noise(rng);
  }
  for (double& v : s) v = std::clamp(v, -1.0, 1.0);
  return AudioClip(std::move(s), kDefaultSampleRate);
}

std::string compose_text(const TopicModel& topics, const std::string& topic, const SynthVoice& voice,
                         double max_speech_seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto primary = keywords_of(topics, topic);
  std::vector<std::string> names;
  for (const auto& [name, kw] : topics.topics) {
    if (name != topic) names.push_back(name);
  }
  const auto secondary = keywords_of(topics, pick(names, rng));
  const std::vector<std::string> fillers(kFillers.begin(), kFillers.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::string text = pick(primary, rng);
  while (true) {
    const double r = u(rng);
    const std::string word = r < 0.5 ? pick(primary, rng) : (r < 0.7 ? pick(secondary, rng) : pick(fillers, rng));
    const std::string next = text + " " + word;
    if (speech_seconds_upper_bound(next, voice) > max_speech_seconds) break;
    text = next;
  }
  return text;
}

std::vector<SynthUtterance> synthesize_training_set(const TopicModel& topics, const TrainingSetOptions& opts) {
  if (opts.utterances < 0 || opts.max_words < 1) throw ArgumentError("synthesize_training_set: invalid options");
  std::vector<std::string> vocab;
  for (const auto& [name, kw] : topics.topics) {
    for (const auto& [word, w] : kw) vocab.push_back(word);
  }
  vocab.insert(vocab.end(), kFillers.begin(), kFillers.end());
  const auto voices = default_voices();
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> words(1, opts.max_words);
  std::uniform_int_distribution<int> lead(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<SynthUtterance> out;
  out.reserve(static_cast<std::size_t>(opts.utterances));
  for (int i = 0; i < opts.utterances; ++i) {
    const int n = words(rng);
    std::string text = pick(vocab, rng);
    for (int j = 1; j < n; ++j) text += " " + pick(vocab, rng);
    const SynthVoice& voice = voices[static_cast<std::size_t>(i) % voices.size()];
    SynthOptions so;
    so.leading_silence = 0.1 * lead(rng);
    so.background_noise = u(rng) >= opts.noiseless_fraction;
    so.total_seconds = so.leading_silence + speech_seconds_upper_bound(text, voice) + 0.1;
    const std::uint64_t seed = rng();
    out.push_back({synthesize_speech(text, voice, seed, so), text, voice.speaker_id});
  }
  return out;
}

SynthCorpusPaths write_synthetic_corpus(const std::filesystem::path& dir, const TopicModel& topics,
                                        const SynthCorpusOptions& opts) {
  const auto voices = default_voices();
  std::vector<std::string> names;
  for (const auto& [name, kw] : topics.topics) names.push_back(name);

  SynthCorpusPaths paths{dir / "craft.tsv", dir / "eval.tsv", {}};
  auto emit = [&](const std::string& split, int count, auto&& topic_of, auto&& voice_of, auto&& seconds_of,
                  std::uint64_t salt, const std::filesystem::path& manifest) {
    std::filesystem::create_directories(dir / split);
    std::ofstream m(manifest);
    if (!m) throw IoError("cannot write " + manifest.string());
    for (int i = 0; i < count; ++i) {
      const SynthVoice& voice = voice_of(i);
      const std::string& topic = topic_of(i);
      const double seconds = seconds_of(i);
      const std::uint64_t seed = opts.seed * 1000003ULL + salt * 1009ULL + static_cast<std::uint64_t>(i);
      SynthOptions so;
      so.total_seconds = seconds;
      const std::string text = compose_text(topics, topic, voice, seconds - so.leading_silence - 0.15, seed);
      const AudioClip clip = synthesize_speech(text, voice, seed ^ 0x5bd1e995ULL, so);
      const std::string stem = fmt::format("{}_{:02d}", split, i);
      write_wav(clip, dir / split / (stem + ".wav"));
      write_text(dir / split / (stem + ".txt"), text);
      m << split << '/' << stem << ".wav\t" << split << '/' << stem << ".txt\t" << voice.speaker_id << '\t' << topic
        << '\n';
    }
  };
  emit(
      "craft", opts.craft_clips, [&](int i) -> const std::string& { return names[static_cast<std::size_t>(i) % names.size()]; },
      [&](int i) -> const SynthVoice& { return voices[static_cast<std::size_t>(i) % voices.size()]; },
      [&](int) { return opts.craft_seconds; }, 1, paths.craft_manifest);
  emit(
      "eval", opts.eval_clips,
      [&](int i) -> const std::string& { return names[static_cast<std::size_t>(i * 5 + 3) % names.size()]; },
      [&](int i) -> const SynthVoice& { return voices[static_cast<std::size_t>(i + 1) % voices.size()]; },
      [&](int i) { return opts.eval_seconds_min + opts.eval_seconds_step * (i % 4); }, 2, paths.eval_manifest);

  if (opts.train_utterances > 0) {
    TrainingSetOptions to;
    to.utterances = opts.train_utterances;
    to.seed = opts.seed * 31ULL + 7ULL;
    const auto set = synthesize_training_set(topics, to);
    paths.train_manifest = dir / "train.tsv";
    std::filesystem::create_directories(dir / "train");
    std::ofstream m(paths.train_manifest);
    if (!m) throw IoError("cannot write " + paths.train_manifest.string());
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::string stem = fmt::format("train_{:03d}", i);
      write_wav(set[i].clip, dir / "train" / (stem + ".wav"));
      write_text(dir / "train" / (stem + ".txt"), set[i].text);
      m << "train/" << stem << ".wav\ttrain/" << stem << ".txt\t" << set[i].speaker_id << "\tnone\n";
    }
  }
  return paths;
}

}  // namespace uapkit
