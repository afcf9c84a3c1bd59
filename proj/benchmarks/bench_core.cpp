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

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "uapkit/alphabet.hpp"
#include "uapkit/asr.hpp"
#include "uapkit/crafter.hpp"
#include "uapkit/ctc.hpp"
#include "uapkit/mfcc.hpp"
#include "uapkit/stream.hpp"

using namespace uapkit;

namespace {

AudioClip noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  std::vector<double> s(n);
  for (double& v : s) v = d(rng);
  return AudioClip(std::move(s));
}

// An untrained model with standardization fitted to the input, which is all
// the timing needs.
SurrogateAsr model_for(const AudioClip& clip) {
  SurrogateAsr m;
  const Matrix f = mfcc_forward(clip, m.config().mfcc).frames;
  m.feature_mean = f.colwise().mean();
  m.feature_std = ((f.rowwise() - m.feature_mean).array().square().colwise().mean().sqrt() + 1e-3).matrix();
  return m;
}

void BM_MfccForward(benchmark::State& state) {
  const AudioClip x = noise(static_cast<std::size_t>(state.range(0)), 1);
  const MfccConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(mfcc_forward(x, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MfccForward)->Arg(16000)->Arg(144000);

void BM_MfccBackward(benchmark::State& state) {
  const AudioClip x = noise(static_cast<std::size_t>(state.range(0)), 2);
  const MfccConfig cfg;
  MfccContext ctx;
  const FeatureMatrix f = mfcc_forward(x, cfg, &ctx);
  const Matrix u = Matrix::Ones(f.frames.rows(), f.frames.cols());
  for (auto _ : state) benchmark::DoNotOptimize(mfcc_backward(u, ctx));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MfccBackward)->Arg(16000)->Arg(144000);

void BM_CtcLossAndGradient(benchmark::State& state) {
  const auto frames = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  Matrix lp(frames, Alphabet::kSize);
  for (Eigen::Index i = 0; i < lp.size(); ++i) lp.data()[i] = d(rng);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double m = lp.row(t).maxCoeff();
    lp.row(t).array() -= m + std::log((lp.row(t).array() - m).exp().sum());
  }
  const CtcTarget tgt = CtcTarget::from_text("the market closed higher on budget news today");
  for (auto _ : state) benchmark::DoNotOptimize(ctc_backward(ctc_loss(lp, tgt.labels, Alphabet::kBlank)));
}
BENCHMARK(BM_CtcLossAndGradient)->Arg(98)->Arg(898);

void BM_InputGradient(benchmark::State& state) {
  const AudioClip x = noise(static_cast<std::size_t>(state.range(0)), 4);
  const SurrogateAsr m = model_for(x);
  const CtcTarget tgt = CtcTarget::from_text("budget news");
  for (auto _ : state) benchmark::DoNotOptimize(input_gradient(m, x, tgt));
}
BENCHMARK(BM_InputGradient)->Arg(16000)->Arg(144000)->Unit(benchmark::kMillisecond);

void BM_StreamChunk(benchmark::State& state) {
  const AudioClip chunk = noise(static_cast<std::size_t>(state.range(0)), 5);
  Injector inj(random_edge_perturbation(150, 3.0, 6));
  for (auto _ : state) benchmark::DoNotOptimize(inj.process_chunk(chunk));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StreamChunk)->Arg(160)->Arg(1600);

}  // namespace

BENCHMARK_MAIN();
