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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace uapkit {

inline constexpr int kDefaultSampleRate = 16000;

// Full-scale constant between 16-bit sample units and normalized [-1, 1].
// Perturbation bounds are quoted in raw units (70, 100, ... 400).
inline constexpr double kRawScale = 32768.0;

inline constexpr double raw_to_norm(double raw) { return raw / kRawScale; }
inline constexpr double norm_to_raw(double norm) { return norm * kRawScale; }

// Mono PCM audio in normalized units.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  AudioClip() = default;
  explicit AudioClip(std::vector<double> s, int rate = kDefaultSampleRate);

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double seconds() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
  std::span<const double> view() const noexcept { return samples; }

  bool operator==(const AudioClip&) const = default;
};

// A short perturbation with its l-infinity bound, stored in raw units.
struct Perturbation {
  AudioClip clip;
  double lambda_raw = 0.0;

  double lambda_norm() const noexcept { return raw_to_norm(lambda_raw); }
  double seconds() const noexcept { return clip.seconds(); }
};

// WAV I/O. Only RIFF/WAVE, PCM, 16-bit, mono is accepted; the sample rate is
// taken from the header and not resampled.
AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

// In-memory variants, used by the stream tool and tests.
AudioClip decode_wav(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_wav(const AudioClip& clip);

// v -> round(v * 32768) clamped to int16.
std::int16_t quantize_sample(double v) noexcept;
inline double dequantize_sample(std::int16_t q) noexcept { return q / kRawScale; }

// delta^k: k back-to-back copies.
AudioClip tile(const AudioClip& delta, std::size_t k);
AudioClip tile(const Perturbation& delta, std::size_t k);

// Repeat `delta` until it covers exactly `length` samples.
AudioClip tile_to_length(const AudioClip& delta, std::size_t length);

AudioClip clip_amplitude(const AudioClip& clip, double lambda_norm);
AudioClip scale(const AudioClip& clip, double factor);
Perturbation scale(const Perturbation& delta, double factor);

// Elementwise sum clamped to [-1, 1]. Both inputs must have the same length
// and rate.
AudioClip mix(const AudioClip& signal, const AudioClip& perturbation);

// First floor(seconds * rate) samples.
AudioClip crop(const AudioClip& clip, double seconds);

double mean_power(std::span<const double> samples) noexcept;
double linf_norm(std::span<const double> samples) noexcept;
double l2_norm(std::span<const double> samples) noexcept;

// 10 log10(P_signal / P_noise) with P the mean square. Returns +inf for
// silent noise and -inf for a silent signal.
double snr_db(const AudioClip& signal, const AudioClip& noise);

}  // namespace uapkit
