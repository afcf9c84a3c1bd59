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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_util.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/stream.hpp"

using namespace uapkit;
using uapkit::testing::random_clip;

namespace {

Perturbation make_delta(std::size_t n, std::uint64_t seed, double lambda_raw = 150.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-static_cast<int>(lambda_raw), static_cast<int>(lambda_raw));
  std::vector<double> s(n);
  for (double& v : s) v = raw_to_norm(d(rng));
  return {AudioClip(std::move(s)), lambda_raw};
}

AudioClip slice(const AudioClip& c, std::size_t begin, std::size_t end) {
  return AudioClip(std::vector<double>(c.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                       c.samples.begin() + static_cast<std::ptrdiff_t>(end)),
                   c.sample_rate);
}

AudioClip stream_all(Injector& inj, const AudioClip& in, const std::vector<std::size_t>& cuts) {
  AudioClip out({}, in.sample_rate);
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    const AudioClip part = inj.process_chunk(slice(in, prev, c));
    out.samples.insert(out.samples.end(), part.samples.begin(), part.samples.end());
    prev = c;
  }
  return out;
}

std::vector<std::size_t> random_cuts(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> d(1, 4000);
  std::vector<std::size_t> cuts;
  for (std::size_t pos = 0; pos < n;) {
    pos = std::min(n, pos + d(rng));
    cuts.push_back(pos);
  }
  return cuts;
}

}  // namespace

TEST(Stream, ChunkingMatchesOfflineMix) {
  const AudioClip speech = random_clip(48000, 3, 0.9);
  const Perturbation delta = make_delta(1777, 4, 300);
  const AudioClip offline = mix(speech, tile_to_length(delta.clip, speech.size()));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Injector inj(delta);
    EXPECT_EQ(stream_all(inj, speech, random_cuts(speech.size(), seed)), offline) << "chunking " << seed;
    EXPECT_EQ(inj.state().position, speech.size());
    EXPECT_EQ(inj.state().phase, speech.size() % delta.clip.size());
  }
}

TEST(Stream, SingleSampleChunks) {
  const AudioClip speech = random_clip(3000, 5);
  const Perturbation delta = make_delta(7, 6);
  std::vector<std::size_t> cuts(speech.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
  Injector inj(delta);
  EXPECT_EQ(stream_all(inj, speech, cuts), mix(speech, tile_to_length(delta.clip, speech.size())));
}

TEST(Stream, FactorZeroIsIdentity) {
  const AudioClip speech = random_clip(10000, 8);
  Injector inj(make_delta(333, 9), 0.0);
  EXPECT_EQ(inj.process_chunk(speech), speech);
}

TEST(Stream, FactorTwoDoublesTheBound) {
  const AudioClip silence(std::vector<double>(20000, 0.0));
  const Perturbation delta = make_delta(500, 10, 100);
  Injector inj(delta, 2.0);
  const AudioClip out = inj.process_chunk(silence);
  EXPECT_LE(norm_to_raw(linf_norm(out.samples)), 200.0 + 1e-9);
  EXPECT_DOUBLE_EQ(linf_norm(out.samples), 2.0 * linf_norm(delta.clip.samples));
}

TEST(Stream, AmplitudeChangeIsBoundedAtTheSwitch) {
  const AudioClip silence(std::vector<double>(8000, 0.0));
  const Perturbation delta = make_delta(400, 11, 150);
  Injector inj(delta);
  const AudioClip a = inj.process_chunk(silence);
  inj.apply(ControlCommand::set_amplitude(0.5));
  const AudioClip b = inj.process_chunk(silence);
  const double jump = std::abs(b.samples.front() - a.samples.back());
  EXPECT_LE(norm_to_raw(jump), 150.0 * 1.5 + 1e-9);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b.samples[i], 0.5 * delta.clip.samples[(8000 + i) % 400]);
  }
}

TEST(Stream, VadGatesSilentFrames) {
  // 0.5 s silence then 0.5 s loud signal.
  std::vector<double> s(16000, 0.0);
  const AudioClip loud = random_clip(8000, 12, 0.5);
  std::copy(loud.samples.begin(), loud.samples.end(), s.begin() + 8000);
  const AudioClip in(s);
  const Perturbation delta = make_delta(640, 13);
  Injector inj(delta);
  inj.apply(ControlCommand::set_vad(true, 1e-4));
  const AudioClip out = inj.process_chunk(in);
  for (std::size_t i = 0; i < 8000; ++i) ASSERT_EQ(out.samples[i], 0.0);
  const AudioClip offline = mix(in, tile_to_length(delta.clip, in.size()));
  for (std::size_t i = 8000; i < 16000; ++i) ASSERT_EQ(out.samples[i], offline.samples[i]);
  inj.apply(ControlCommand::set_vad(false));
  const AudioClip after = inj.process_chunk(in);
  for (std::size_t i = 0; i < after.size(); ++i) {
    ASSERT_EQ(after.samples[i], std::clamp(in.samples[i] + delta.clip.samples[(16000 + i) % 640], -1.0, 1.0));
  }
}

TEST(Stream, VadGateFrames) {
  std::vector<double> s(1000, 0.0);
  for (std::size_t i = 320; i < 640; ++i) s[i] = 0.1;
  const std::vector<bool> g = vad_gate(AudioClip(s), 1e-3);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(g[i], i >= 320 && i < 640) << i;
  EXPECT_THROW(vad_gate(AudioClip(s), 0.0), ArgumentError);
}

TEST(Stream, RateMismatchAndStop) {
  Injector inj(make_delta(100, 14));
  EXPECT_THROW(inj.process_chunk(AudioClip(std::vector<double>(10, 0.0), 8000)), StreamError);
  inj.apply(ControlCommand::stop());
  EXPECT_TRUE(inj.stopped());
  EXPECT_THROW(inj.process_chunk(AudioClip(std::vector<double>(10, 0.0))), StreamError);
  EXPECT_THROW(Injector(make_delta(10, 1), -1.0), ArgumentError);
}

TEST(Stream, CommandParsing) {
  EXPECT_EQ(ControlCommand::parse("amp 0.5").factor, 0.5);
  const ControlCommand v = ControlCommand::parse("  vad on 1e-5 ");
  EXPECT_EQ(v.kind, ControlCommand::Kind::kSetVad);
  EXPECT_TRUE(v.vad_on);
  EXPECT_EQ(v.threshold, 1e-5);
  EXPECT_FALSE(ControlCommand::parse("vad off").vad_on);
  EXPECT_EQ(ControlCommand::parse("stop").kind, ControlCommand::Kind::kStop);
  const ControlCommand at = ControlCommand::parse("@16000 amp 2");
  ASSERT_TRUE(at.at_sample.has_value());
  EXPECT_EQ(*at.at_sample, 16000u);
  EXPECT_EQ(at.text(), "amp 2");
  for (const char* bad : {"", "amp", "amp -1", "amp x", "vad on", "vad on 0", "jump 3", "@-5 stop", "@10", "stop now"}) {
    EXPECT_THROW(ControlCommand::parse(bad), ArgumentError) << bad;
  }
}

TEST(Stream, PollHonoursOffsetsAndLogs) {
  const AudioClip silence(std::vector<double>(1600, 0.0));
  Injector inj(make_delta(160, 15));
  CommandChannel ch;
  ch.push(ControlCommand::parse("@3200 amp 0"));
  ch.push(ControlCommand::parse("amp 0.5"));
  inj.poll(ch);
  EXPECT_EQ(inj.state().amplitude_factor, 0.5);
  inj.process_chunk(silence);
  inj.poll(ch);
  EXPECT_EQ(inj.state().amplitude_factor, 0.5);
  inj.process_chunk(silence);
  inj.poll(ch);
  EXPECT_EQ(inj.state().amplitude_factor, 0.0);
  EXPECT_EQ(inj.command_log_text(), "@0 amp 0.5\n@3200 amp 0\n");
  ch.close();
  EXPECT_TRUE(ch.closed());
}

TEST(NoiseCancel, RemovesAnExactlyPeriodicPerturbation) {
  const std::size_t len = 1600;
  const std::size_t quiet = 3 * len + 517;
  std::vector<double> speech(40000, 0.0);
  const AudioClip voice = random_clip(speech.size() - quiet, 16, 0.3);
  std::copy(voice.samples.begin(), voice.samples.end(), speech.begin() + quiet);
  const AudioClip clean(speech);
  const Perturbation delta = make_delta(len, 17, 300);
  const AudioClip injected = tile_to_length(delta.clip, clean.size());
  const AudioClip perturbed = mix(clean, injected);
  const AudioClip restored = noise_cancel(perturbed, len, {0, quiet});
  std::vector<double> residual(clean.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = restored.samples[i] - clean.samples[i];
  EXPECT_LE(mean_power(residual), 0.01 * mean_power(injected.samples));
  EXPECT_LT(linf_norm(residual), 1e-12);
}

TEST(NoiseCancel, WindowNeedNotStartAtZero) {
  const std::size_t len = 800;
  std::vector<double> s(30000, 0.0);
  const AudioClip a = random_clip(5000, 18);
  const AudioClip b = random_clip(15000, 19);
  std::copy(a.samples.begin(), a.samples.end(), s.begin());
  std::copy(b.samples.begin(), b.samples.end(), s.begin() + 15000);
  const AudioClip clean(s);
  const AudioClip injected = tile_to_length(make_delta(len, 20).clip, clean.size());
  const AudioClip restored = noise_cancel(mix(clean, injected), len, {5000, 15000});
  std::vector<double> residual(clean.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = restored.samples[i] - clean.samples[i];
  EXPECT_LE(mean_power(residual), 0.01 * mean_power(injected.samples));
}

TEST(NoiseCancel, BarelyChangesUnperturbedNoise) {
  const AudioClip noise = random_clip(64000, 21, 0.05);
  const AudioClip out = noise_cancel(noise, 100, {0, 32000});
  const double before = mean_power(noise.samples);
  EXPECT_LE(std::abs(mean_power(out.samples) - before), 0.01 * before);
}

TEST(NoiseCancel, RejectsBadWindows) {
  const AudioClip c = random_clip(1000, 22);
  EXPECT_THROW(noise_cancel(c, 0, {0, 500}), ArgumentError);
  EXPECT_THROW(noise_cancel(c, 600, {0, 500}), ArgumentError);
  EXPECT_THROW(noise_cancel(c, 100, {0, 2000}), ArgumentError);
  EXPECT_THROW(noise_cancel(c, 100, {600, 500}), ArgumentError);
}
