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
#include <filesystem>
#include <fstream>
#include <random>

#include "test_util.hpp"
#include "uapkit/asr.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/synth.hpp"

namespace fs = std::filesystem;
using namespace uapkit;
using uapkit::testing::random_clip;
using uapkit::testing::rel_error;

namespace {

// Random weights plus feature statistics fitted to `clip`, so activations sit
// in a realistic range.
SurrogateAsr fitted_model(const AudioClip& clip, std::uint64_t seed) {
  AsrConfig cfg;
  cfg.seed = seed;
  SurrogateAsr m(cfg);
  const Matrix f = mfcc_forward(clip, cfg.mfcc).frames;
  m.feature_mean = f.colwise().mean();
  m.feature_std = ((f.rowwise() - m.feature_mean).array().square().colwise().mean().sqrt() + 1e-3).matrix();
  return m;
}

Matrix one_hot_logprobs(const std::vector<int>& argmax) {
  Matrix lp = Matrix::Constant(static_cast<Eigen::Index>(argmax.size()), Alphabet::kSize, std::log(0.01 / 28));
  for (std::size_t t = 0; t < argmax.size(); ++t) lp(static_cast<Eigen::Index>(t), argmax[t]) = std::log(0.99);
  return lp;
}

std::vector<TrainingExample> tiny_corpus() {
  const auto voices = default_voices();
  std::vector<TrainingExample> out;
  const char* texts[] = {"tax bank", "nurse", "budget jobs", "the vaccine"};
  for (int i = 0; i < 4; ++i) {
    SynthOptions o;
    o.leading_silence = 0.1;
    out.push_back({synthesize_speech(texts[i], voices[static_cast<std::size_t>(i)], 50 + i, o),
                   CtcTarget::from_text(texts[i])});
  }
  return out;
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "uapkit_test_asr";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Asr, RowsAreLogDistributions) {
  const AudioClip x = random_clip(8000, 1);
  const SurrogateAsr m = fitted_model(x, 3);
  const Matrix lp = forward(m, x);
  ASSERT_EQ(lp.cols(), Alphabet::kSize);
  ASSERT_EQ(lp.rows(), static_cast<Eigen::Index>(frame_count(8000, m.config().mfcc)));
  for (Eigen::Index t = 0; t < lp.rows(); ++t) EXPECT_NEAR(std::log(lp.row(t).array().exp().sum()), 0.0, 1e-9);
  EXPECT_EQ(forward(m, x), lp);
}

TEST(Asr, ZeroFinalLayerIsUniform) {
  const AudioClip x = random_clip(4000, 2);
  SurrogateAsr m = fitted_model(x, 4);
  m.w3.setZero();
  m.b3.setZero();
  const Matrix lp = forward(m, x);
  EXPECT_LT((lp.array() + std::log(29.0)).abs().maxCoeff(), 1e-12);
}

TEST(Asr, GreedyDecodeCollapses) {
  const int a = Alphabet::index_of('a'), b = Alphabet::index_of('b'), blank = Alphabet::kBlank;
  EXPECT_EQ(greedy_decode_text(one_hot_logprobs({a, a, blank, b})), "ab");
  EXPECT_EQ(greedy_decode_text(one_hot_logprobs({blank, blank, blank})), "");
  EXPECT_EQ(greedy_decode_text(one_hot_logprobs({a, blank, a})), "aa");
  const int sp = Alphabet::index_of(' ');
  EXPECT_EQ(greedy_decode(one_hot_logprobs({sp, a, sp, sp, blank, b, sp})).words,
            (std::vector<std::string>{"a", "b"}));
}

TEST(Asr, DecodeIgnoresPerFrameOffsets) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 3.0);
  Matrix lp(40, Alphabet::kSize);
  for (Eigen::Index i = 0; i < lp.rows(); ++i)
    for (Eigen::Index j = 0; j < lp.cols(); ++j) lp(i, j) = d(rng);
  Matrix shifted = lp;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) shifted.row(i).array() += d(rng);
  EXPECT_EQ(greedy_decode_text(lp), greedy_decode_text(shifted));
}

TEST(Asr, ParameterGradientsMatchCentralDifferences) {
  const AudioClip x = random_clip(4000, 5);
  SurrogateAsr m = fitted_model(x, 6);
  const Matrix feats = mfcc_forward(x, m.config().mfcc).frames;
  const CtcTarget tgt = CtcTarget::from_text("ab c");
  auto loss = [&] { return ctc_loss(forward_features(m, feats), tgt.labels, Alphabet::kBlank).loss; };
  AsrForwardContext ctx;
  const Matrix lp = forward_features(m, feats, &ctx);
  AsrGradients g = AsrGradients::zeros_like(m);
  backward_network(m, ctx, ctc_backward(ctc_loss(lp, tgt.labels, Alphabet::kBlank)).grad, &g);
  std::mt19937_64 rng(7);
  auto check = [&](auto& param, const auto& grad, const char* name) {
    std::uniform_int_distribution<Eigen::Index> r(0, param.rows() - 1), c(0, param.cols() - 1);
    const double scale = grad.cwiseAbs().maxCoeff();
    for (int k = 0; k < 10; ++k) {
      const Eigen::Index i = r(rng), j = c(rng);
      const double orig = param(i, j), h = 1e-6;
      param(i, j) = orig + h;
      const double up = loss();
      param(i, j) = orig - h;
      const double down = loss();
      param(i, j) = orig;
      EXPECT_LE(rel_error(grad(i, j), (up - down) / (2 * h), 1e-4 * scale), 1e-4) << name << " " << i << "," << j;
    }
  };
  check(m.w1, g.w1, "w1");
  check(m.w2, g.w2, "w2");
  check(m.w3, g.w3, "w3");
  check(m.b1, g.b1, "b1");
  check(m.b3, g.b3, "b3");
}

class WaveformGradient : public ::testing::TestWithParam<int> {};

TEST_P(WaveformGradient, MatchesCentralDifferences) {
  const int seed = GetParam();
  const AudioClip x = random_clip(8000, 300 + seed, 0.1);
  const SurrogateAsr m = fitted_model(x, 400 + seed);
  const CtcTarget tgt = CtcTarget::from_text("the cat");
  const InputGradient g = input_gradient(m, x, tgt);
  ASSERT_TRUE(g.valid);
  ASSERT_EQ(g.grad.size(), x.size());
  double gmax = 0.0;
  for (double v : g.grad) gmax = std::max(gmax, std::abs(v));
  std::mt19937_64 rng(500 + seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const std::size_t i = pick(rng);
    AudioClip p = x, q = x;
    p.samples[i] += h;
    q.samples[i] -= h;
    const double fd = (ctc_loss(forward(m, p), tgt.labels, Alphabet::kBlank).loss -
                       ctc_loss(forward(m, q), tgt.labels, Alphabet::kBlank).loss) /
                      (2 * h);
    EXPECT_LE(rel_error(g.grad[i], fd, 1e-4 * gmax), 5e-3) << "sample " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, WaveformGradient, ::testing::Range(0, 5));

TEST(Asr, RemainderSamplesAreInert) {
  AudioClip x = random_clip(4000 + 77, 9, 0.1);
  const SurrogateAsr m = fitted_model(x, 10);
  const CtcTarget tgt = CtcTarget::from_text("ab");
  const InputGradient a = input_gradient(m, x, tgt);
  const std::size_t covered = (frame_count(x.size(), m.config().mfcc) - 1) * 160 + 400;
  for (std::size_t i = covered; i < x.size(); ++i) {
    EXPECT_EQ(a.grad[i], 0.0);
    x.samples[i] = -x.samples[i];
  }
  const InputGradient b = input_gradient(m, x, tgt);
  EXPECT_EQ(a.loss, b.loss);
  for (std::size_t i = 0; i < covered; ++i) ASSERT_EQ(a.grad[i], b.grad[i]);
}

TEST(Asr, ZeroEpochsLeavesParameters) {
  SurrogateAsr m;
  const SurrogateAsr before = m;
  TrainConfig tc;
  tc.epochs = 0;
  const TrainResult r = train(m, tiny_corpus(), tc);
  EXPECT_EQ(r.epochs_run, 0);
  EXPECT_TRUE(m == before);
}

TEST(Asr, TrainingIsDeterministicAndReducesLoss) {
  const auto corpus = tiny_corpus();
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch_size = 2;
  tc.step_size = 3e-3;
  SurrogateAsr a, b;
  const TrainResult ra = train(a, corpus, tc);
  train(b, corpus, tc);
  EXPECT_TRUE(a == b);
  ASSERT_EQ(ra.loss_curve.size(), 6u);
  EXPECT_LT(ra.loss_curve.back(), ra.loss_curve.front());
}

TEST(Asr, CheckpointRoundTripIsBitExact) {
  const AudioClip x = random_clip(4000, 12);
  const SurrogateAsr m = fitted_model(x, 13);
  const fs::path p = temp_path("model.bin");
  save_model(m, p);
  const SurrogateAsr back = load_model(p);
  EXPECT_TRUE(back == m);
  EXPECT_EQ(forward(back, x), forward(m, x));
}

TEST(Asr, CorruptCheckpointIsRejected) {
  const fs::path p = temp_path("bad.bin");
  {
    std::ofstream out(p, std::ios::binary);
    out << "UAPKASR";
  }
  EXPECT_THROW(load_model(p), FormatError);
  SurrogateAsr m;
  save_model(m, p);
  fs::resize_file(p, fs::file_size(p) - 9);
  EXPECT_THROW(load_model(p), FormatError);
}
