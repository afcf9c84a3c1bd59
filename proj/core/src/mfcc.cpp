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

#include "uapkit/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_edges_hz(const MfccConfig& cfg) {
  const double lo = hz_to_mel(cfg.low_hz);
  const double hi = hz_to_mel(cfg.upper_hz());
  const int points = cfg.mel_filters + 2;
  std::vector<double> edges(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (points - 1));
  }
  return edges;
}

// Constant tables for one config, rebuilt per call (cheap next to the FFTs).
struct Tables {
  std::vector<double> window;
  Matrix filterbank;  // F x B
  Matrix dct;         // C x F
};

Tables make_tables(const MfccConfig& cfg) {
  Tables t;
  t.window = hann_window(cfg.frame_length);
  t.filterbank = mel_filterbank(cfg);
  t.dct = dct_matrix(cfg.mel_filters).topRows(cfg.cepstral_coeffs);
  return t;
}

}  // namespace

void MfccConfig::validate() const {
  if (sample_rate <= 0) throw ArgumentError("MfccConfig: sample_rate must be positive");
  if (frame_length <= 0 || frame_step <= 0) throw ArgumentError("MfccConfig: framing must be positive");
  if (frame_length > fft_size) throw ArgumentError("MfccConfig: frame_length exceeds fft_size");
  if (mel_filters <= 0 || cepstral_coeffs <= 0 || cepstral_coeffs > mel_filters) {
    throw ArgumentError("MfccConfig: need 0 < cepstral_coeffs <= mel_filters");
  }
  if (!(log_floor > 0.0)) throw ArgumentError("MfccConfig: log_floor must be positive");
  if (low_hz < 0.0 || !(upper_hz() > low_hz) || upper_hz() > 0.5 * sample_rate) {
    throw ArgumentError("MfccConfig: invalid filterbank frequency range");
  }
}

std::size_t frame_count(std::size_t n, const MfccConfig& cfg) noexcept {
  const auto len = static_cast<std::size_t>(cfg.frame_length);
  if (n < len) return 0;
  return 1 + (n - len) / static_cast<std::size_t>(cfg.frame_step);
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n) {
    w[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  }
  return w;
}

Matrix mel_filterbank(const MfccConfig& cfg) {
  cfg.validate();
  const auto edges = mel_edges_hz(cfg);
  const int bins = cfg.fft_size / 2 + 1;
  Matrix fb = Matrix::Zero(cfg.mel_filters, bins);
  for (int m = 0; m < cfg.mel_filters; ++m) {
    const double left = edges[static_cast<std::size_t>(m)];
    const double center = edges[static_cast<std::size_t>(m) + 1];
    const double right = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

std::vector<double> mel_center_frequencies(const MfccConfig& cfg) {
  const auto edges = mel_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix dct_matrix(int n) {
  Matrix d(n, n);
  for (int c = 0; c < n; ++c) {
    const double norm = c == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int m = 0; m < n; ++m) {
      d(c, m) = norm * std::cos(std::numbers::pi * c * (m + 0.5) / n);
    }
  }
  return d;
}

FeatureMatrix mfcc_forward(const AudioClip& clip, const MfccConfig& cfg, MfccContext* ctx) {
  cfg.validate();
  if (clip.sample_rate != cfg.sample_rate) {
    throw ArgumentError("mfcc_forward: clip rate " + std::to_string(clip.sample_rate) +
                        " does not match frontend rate " + std::to_string(cfg.sample_rate));
  }
  const std::size_t n = clip.size();
  const std::size_t frames = frame_count(n, cfg);
  if (frames == 0) throw ArgumentError("mfcc_forward: clip shorter than one frame");

  const Tables tables = make_tables(cfg);
  const detail::RealFft fft(cfg.fft_size);
  const auto bins = static_cast<std::size_t>(fft.bins());
  const auto flen = static_cast<std::size_t>(cfg.frame_length);
  const auto fstep = static_cast<std::size_t>(cfg.frame_step);

  std::vector<double> emph(n);
  emph[0] = clip.samples[0];
  for (std::size_t i = 1; i < n; ++i) emph[i] = clip.samples[i] - cfg.preemphasis * clip.samples[i - 1];

  std::vector<std::complex<double>> spectra(frames * bins);
  Matrix power(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));
  std::vector<double> buf(static_cast<std::size_t>(cfg.fft_size), 0.0);
  const double inv_n = 1.0 / cfg.fft_size;
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * fstep;
    for (std::size_t i = 0; i < flen; ++i) buf[i] = emph[start + i] * tables.window[i];
    std::span<std::complex<double>> spec(spectra.data() + t * bins, bins);
    fft.forward(buf, spec);
    for (std::size_t k = 0; k < bins; ++k) {
      power(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = std::norm(spec[k]) * inv_n;
    }
  }

  Matrix energies = power * tables.filterbank.transpose();
  Matrix logs = energies.unaryExpr([&](double e) { return std::log(std::max(e, cfg.log_floor)); });

  FeatureMatrix out;
  out.frames = logs * tables.dct.transpose();
  out.frame_times.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) out.frame_times[t] = t * fstep;

  if (ctx != nullptr) {
    ctx->cfg = cfg;
    ctx->input_length = n;
    ctx->spectra = std::move(spectra);
    ctx->filterbank_energies = std::move(energies);
    ctx->log_energies = std::move(logs);
  }
  return out;
}

std::vector<double> mfcc_backward(const Matrix& upstream, const MfccContext& ctx) {
  const MfccConfig& cfg = ctx.cfg;
  const Eigen::Index frames = ctx.filterbank_energies.rows();
  if (upstream.rows() != frames || upstream.cols() != cfg.cepstral_coeffs) {
    throw ArgumentError("mfcc_backward: upstream gradient shape does not match the forward pass");
  }
  const Tables tables = make_tables(cfg);
  const detail::RealFft fft(cfg.fft_size);
  const auto bins = static_cast<std::size_t>(fft.bins());
  const auto flen = static_cast<std::size_t>(cfg.frame_length);
  const auto fstep = static_cast<std::size_t>(cfg.frame_step);

  // d log E: through the DCT; d E: through the floored log.
  Matrix d_log = upstream * tables.dct;
  Matrix d_energy = d_log;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index m = 0; m < d_energy.cols(); ++m) {
      const double e = ctx.filterbank_energies(t, m);
      d_energy(t, m) = e > cfg.log_floor ? d_log(t, m) / e : 0.0;
    }
  }
  const Matrix d_power = d_energy * tables.filterbank;

  std::vector<double> d_emph(ctx.input_length, 0.0);
  std::vector<std::complex<double>> half(bins);
  std::vector<double> frame_grad(static_cast<std::size_t>(cfg.fft_size));
  const double inv_n = 1.0 / cfg.fft_size;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::complex<double>* spec = ctx.spectra.data() + static_cast<std::size_t>(t) * bins;
    // P_k = |X_k|^2 / N  =>  dL/dx_n = (1/N) * c2r(Z), Z_k = 2 g_k X_k at the
    // DC and Nyquist bins and g_k X_k elsewhere.
    for (std::size_t k = 0; k < bins; ++k) {
      const double g = d_power(t, static_cast<Eigen::Index>(k));
      const double edge = (k == 0 || k == bins - 1) ? 2.0 : 1.0;
      half[k] = edge * g * spec[k];
    }
    half[0].imag(0.0);
    half[bins - 1].imag(0.0);
    fft.inverse(half, frame_grad);
    const std::size_t start = static_cast<std::size_t>(t) * fstep;
    for (std::size_t i = 0; i < flen; ++i) d_emph[start + i] += frame_grad[i] * inv_n * tables.window[i];
  }

  std::vector<double> grad(ctx.input_length, 0.0);
  for (std::size_t i = 0; i < ctx.input_length; ++i) {
    grad[i] = d_emph[i] - (i + 1 < ctx.input_length ? cfg.preemphasis * d_emph[i + 1] : 0.0);
  }
  return grad;
}

}  // namespace uapkit
