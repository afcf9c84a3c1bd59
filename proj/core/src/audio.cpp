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

#include "uapkit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

constexpr std::uint16_t kPcmFormat = 1;
constexpr std::uint16_t kExtensibleFormat = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

void require_same_shape(const AudioClip& a, const AudioClip& b, const char* what) {
  if (a.size() != b.size()) {
    throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
  if (a.sample_rate != b.sample_rate) {
    throw ArgumentError(std::string(what) + ": sample rate mismatch");
  }
}

}  // namespace

AudioClip::AudioClip(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {
  if (rate <= 0) throw ArgumentError("AudioClip: sample rate must be positive");
}

std::int16_t quantize_sample(double v) noexcept {
  const double q = std::round(v * kRawScale);
  if (!(q > -32768.0)) return std::numeric_limits<std::int16_t>::min();
  if (q > 32767.0) return std::numeric_limits<std::int16_t>::max();
  return static_cast<std::int16_t>(q);
}

AudioClip decode_wav(std::span<const unsigned char> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t chunk_size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) throw FormatError("truncated fmt chunk");
      const std::uint16_t format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format != kPcmFormat && format != kExtensibleFormat) {
        throw UnsupportedFormatError("WAV format code " + std::to_string(format) + " is not PCM");
      }
      if (channels != 1) {
        throw UnsupportedFormatError("WAV has " + std::to_string(channels) + " channels; mono required");
      }
      if (bits != 16) {
        throw UnsupportedFormatError("WAV has " + std::to_string(bits) + "-bit samples; 16-bit required");
      }
      if (rate == 0) throw FormatError("WAV sample rate is zero");
      if (rate != static_cast<std::uint32_t>(kDefaultSampleRate)) {
        throw UnsupportedFormatError("WAV is " + std::to_string(rate) + " Hz; 16000 Hz required (no resampling)");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk precedes fmt chunk");
      std::size_t n_bytes = chunk_size;
      if (body + n_bytes > bytes.size()) throw FormatError("truncated data chunk");
      if (n_bytes % 2 != 0) throw FormatError("odd-sized 16-bit data chunk");
      std::vector<double> samples(n_bytes / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto q = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * i));
        samples[i] = dequantize_sample(q);
      }
      return AudioClip(std::move(samples), static_cast<int>(rate));
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw FormatError(have_fmt ? "WAV has no data chunk" : "WAV has no fmt chunk");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> encode_wav(const AudioClip& clip) {
  const auto data_bytes = static_cast<std::uint32_t>(clip.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kPcmFormat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double v : clip.samples) put_u16(out, static_cast<std::uint16_t>(quantize_sample(v)));
  return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

AudioClip tile(const AudioClip& delta, std::size_t k) {
  if (k == 0) throw ArgumentError("tile: k must be >= 1");
  return tile_to_length(delta, delta.size() * k);
}

AudioClip tile(const Perturbation& delta, std::size_t k) { return tile(delta.clip, k); }

AudioClip tile_to_length(const AudioClip& delta, std::size_t length) {
  if (delta.empty() && length > 0) throw ArgumentError("tile: empty perturbation");
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = delta.samples[i % delta.size()];
  return AudioClip(std::move(out), delta.sample_rate);
}

AudioClip clip_amplitude(const AudioClip& clip, double lambda_norm) {
  if (!(lambda_norm > 0.0)) throw ArgumentError("clip_amplitude: bound must be positive");
  AudioClip out = clip;
  for (double& v : out.samples) v = std::min(lambda_norm, std::max(-lambda_norm, v));
  return out;
}

AudioClip scale(const AudioClip& clip, double factor) {
  if (factor < 0.0) throw ArgumentError("scale: factor must be nonnegative");
  AudioClip out = clip;
  for (double& v : out.samples) v *= factor;
  return out;
}

Perturbation scale(const Perturbation& delta, double factor) {
  return Perturbation{scale(delta.clip, factor), delta.lambda_raw * factor};
}

AudioClip mix(const AudioClip& signal, const AudioClip& perturbation) {
  require_same_shape(signal, perturbation, "mix");
  AudioClip out = signal;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.samples[i] = std::clamp(signal.samples[i] + perturbation.samples[i], -1.0, 1.0);
  }
  return out;
}

AudioClip crop(const AudioClip& clip, double seconds) {
  if (!(seconds > 0.0)) throw ArgumentError("crop: duration must be positive");
  const auto n = static_cast<std::size_t>(std::floor(seconds * clip.sample_rate));
  if (n > clip.size()) {
    throw ArgumentError("crop: clip is " + std::to_string(clip.seconds()) + " s, shorter than " +
                        std::to_string(seconds) + " s");
  }
  return AudioClip(std::vector<double>(clip.samples.begin(), clip.samples.begin() + static_cast<std::ptrdiff_t>(n)),
                   clip.sample_rate);
}

double mean_power(std::span<const double> samples) noexcept {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return acc / static_cast<double>(samples.size());
}

double linf_norm(std::span<const double> samples) noexcept {
  double m = 0.0;
  for (double v : samples) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(std::span<const double> samples) noexcept {
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return std::sqrt(acc);
}

double snr_db(const AudioClip& signal, const AudioClip& noise) {
  require_same_shape(signal, noise, "snr_db");
  const double ps = mean_power(signal.samples);
  const double pn = mean_power(noise.samples);
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  if (ps == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ps / pn);
}

}  // namespace uapkit
