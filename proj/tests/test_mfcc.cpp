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

#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "uapkit/mfcc.hpp"

using namespace uapkit;
using uapkit::testing::random_clip;
using uapkit::testing::rel_error;

namespace {

AudioClip sine(double hz, std::size_t n, double amp = 0.5) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / 16000);
  return AudioClip(std::move(s));
}

Matrix random_upstream(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix u(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) u(i, j) = d(rng);
  return u;
}

double contract(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace

TEST(Mfcc, FrameCountFormula) {
  const MfccConfig cfg;
  EXPECT_EQ(frame_count(144000, cfg), 898u);
  EXPECT_EQ(frame_count(399, cfg), 0u);
  EXPECT_EQ(frame_count(400, cfg), 1u);
  EXPECT_EQ(mfcc_forward(AudioClip(std::vector<double>(144000, 0.0)), cfg).num_frames(), 898);
}

TEST(Mfcc, DctIsOrthonormal) {
  for (int n : {13, 26, 40}) {
    const Matrix d = dct_matrix(n);
    EXPECT_LT((d.transpose() * d - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Mfcc, FilterbankShape) {
  const MfccConfig cfg;
  const Matrix fb = mel_filterbank(cfg);
  ASSERT_EQ(fb.rows(), cfg.mel_filters);
  ASSERT_EQ(fb.cols(), cfg.fft_size / 2 + 1);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (Eigen::Index m = 0; m + 1 < fb.rows(); ++m) {
    EXPECT_GT((fb.row(m).array() * fb.row(m + 1).array()).sum(), 0.0) << "filters " << m << " and " << m + 1;
  }
  // Every bin strictly inside the outer filter edges is covered.
  Eigen::Index first = -1, last = -1;
  const RowVector total = fb.colwise().sum();
  for (Eigen::Index k = 0; k < total.size(); ++k) {
    if (total(k) > 0) {
      if (first < 0) first = k;
      last = k;
    }
  }
  for (Eigen::Index k = first; k <= last; ++k) EXPECT_GT(total(k), 0.0) << "bin " << k;
}

TEST(Mfcc, SilenceHitsFloorAndConcentratesInC0) {
  const MfccConfig cfg;
  MfccContext ctx;
  const FeatureMatrix f = mfcc_forward(AudioClip(std::vector<double>(1600, 0.0)), cfg, &ctx);
  EXPECT_TRUE((ctx.log_energies.array() == std::log(cfg.log_floor)).all());
  for (Eigen::Index t = 0; t < f.num_frames(); ++t) {
    EXPECT_NEAR(f.frames(t, 0), std::log(cfg.log_floor) * std::sqrt(cfg.mel_filters), 1e-9);
    for (Eigen::Index j = 1; j < f.num_coeffs(); ++j) EXPECT_NEAR(f.frames(t, j), 0.0, 1e-9);
  }
}

TEST(Mfcc, SineAtCenterPeaksInItsFilter) {
  const MfccConfig cfg;
  const auto centers = mel_center_frequencies(cfg);
  // The lowest filters are narrower than an FFT bin pair; start where a
  // filter spans at least three bins.
  for (std::size_t m = 4; m < centers.size(); ++m) {
    MfccContext ctx;
    mfcc_forward(sine(centers[m], 4000), cfg, &ctx);
    Eigen::Index best = 0;
    ctx.filterbank_energies.row(5).maxCoeff(&best);
    EXPECT_EQ(best, static_cast<Eigen::Index>(m)) << "center " << centers[m] << " Hz";
  }
}

TEST(Mfcc, DoublingAddsLogFourToEnergies) {
  const MfccConfig cfg;
  const AudioClip x = random_clip(3200, 21);
  MfccContext a, b;
  mfcc_forward(x, cfg, &a);
  mfcc_forward(scale(x, 2.0), cfg, &b);
  const Matrix diff = b.log_energies - a.log_energies;
  EXPECT_LT((diff.array() - std::log(4.0)).abs().maxCoeff(), 1e-9);
}

TEST(MfccBackward, ZeroUpstreamGivesZero) {
  const MfccConfig cfg;
  MfccContext ctx;
  const FeatureMatrix f = mfcc_forward(random_clip(2000, 2), cfg, &ctx);
  const auto g = mfcc_backward(Matrix::Zero(f.num_frames(), f.num_coeffs()), ctx);
  ASSERT_EQ(g.size(), 2000u);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(MfccBackward, TailRemainderHasNoGradient) {
  const MfccConfig cfg;
  const std::size_t n = 1600 + 123;  // 123 samples past the last full frame
  MfccContext ctx;
  const FeatureMatrix f = mfcc_forward(random_clip(n, 3), cfg, &ctx);
  const std::size_t covered = (f.num_frames() - 1) * cfg.frame_step + cfg.frame_length;
  const auto g = mfcc_backward(random_upstream(f.num_frames(), f.num_coeffs(), 4), ctx);
  for (std::size_t i = covered; i < n; ++i) EXPECT_EQ(g[i], 0.0);
}

class MfccGradient : public ::testing::TestWithParam<int> {};

TEST_P(MfccGradient, MatchesCentralDifferences) {
  const int seed = GetParam();
  const MfccConfig cfg;
  const AudioClip x = random_clip(1600, 1000 + seed);
  MfccContext ctx;
  const FeatureMatrix f = mfcc_forward(x, cfg, &ctx);
  const Matrix u = random_upstream(f.num_frames(), f.num_coeffs(), 2000 + seed);
  const auto g = mfcc_backward(u, ctx);
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));

  std::mt19937_64 rng(3000 + seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  const double h = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t i = pick(rng);
    AudioClip p = x, m = x;
    p.samples[i] += h;
    m.samples[i] -= h;
    const double fd = (contract(u, mfcc_forward(p, cfg).frames) - contract(u, mfcc_forward(m, cfg).frames)) / (2 * h);
    EXPECT_LE(rel_error(g[i], fd, 1e-4 * gmax), 1e-3) << "sample " << i << " analytic " << g[i] << " fd " << fd;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, MfccGradient, ::testing::Range(0, 5));
