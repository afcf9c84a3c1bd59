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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "uapkit/audio.hpp"
#include "uapkit/matrix.hpp"

namespace uapkit {

// Frontend parameters. Defaults are 25 ms / 10 ms framing at 16 kHz.
struct MfccConfig {
  int sample_rate = kDefaultSampleRate;
  int frame_length = 400;
  int frame_step = 160;
  int fft_size = 512;
  int mel_filters = 26;
  int cepstral_coeffs = 13;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist

  void validate() const;
  double upper_hz() const noexcept { return high_hz > 0.0 ? high_hz : 0.5 * sample_rate; }
  bool operator==(const MfccConfig&) const = default;
};

struct FeatureMatrix {
  Matrix frames;                        // T x C
  std::vector<std::size_t> frame_times; // start sample of each frame

  Eigen::Index num_frames() const noexcept { return frames.rows(); }
  Eigen::Index num_coeffs() const noexcept { return frames.cols(); }
};

// Everything the reverse pass needs. Produced by mfcc_forward; owned by the
// caller so concurrent forward/backward pairs never share state.
struct MfccContext {
  MfccConfig cfg;
  std::size_t input_length = 0;
  std::vector<std::complex<double>> spectra;  // T x (fft_size/2+1), row-major
  Matrix filterbank_energies;                 // T x mel_filters, before the log
  Matrix log_energies;                        // T x mel_filters, after the floor
};

// 1 + floor((n - frame_length) / frame_step), or 0 when n < frame_length.
std::size_t frame_count(std::size_t n, const MfccConfig& cfg) noexcept;

// Triangular filters on the HTK mel scale, mel_filters x (fft_size/2+1).
// Weights are evaluated at each bin's center frequency.
Matrix mel_filterbank(const MfccConfig& cfg);

// Filter center frequencies in Hz (one per filter).
std::vector<double> mel_center_frequencies(const MfccConfig& cfg);

// Orthonormal DCT-II, n x n, rows are basis vectors.
Matrix dct_matrix(int n);

// Periodic Hann window of the given length.
std::vector<double> hann_window(int length);

FeatureMatrix mfcc_forward(const AudioClip& clip, const MfccConfig& cfg, MfccContext* ctx = nullptr);

// Vector-Jacobian product of mfcc_forward. Returns d(loss)/d(sample) for every
// input sample; samples past the last full frame get zero.
std::vector<double> mfcc_backward(const Matrix& upstream, const MfccContext& ctx);

}  // namespace uapkit
