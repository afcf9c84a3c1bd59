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
#include <functional>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "uapkit/asr.hpp"
#include "uapkit/ctc.hpp"
#include "uapkit/errors.hpp"

using namespace uapkit;
using namespace uapkit::testing;

TEST(Ctc, CertainPathHasZeroLoss) {
  Matrix lp = Matrix::Constant(1, 2, -std::numeric_limits<double>::infinity());
  lp(0, 0) = 0.0;  // P(a) = 1
  const std::vector<int> a = {0};
  const CtcResult r = ctc_loss(lp, a, 1);
  EXPECT_EQ(r.loss, 0.0);
  const CtcGradient g = ctc_backward(r);
  ASSERT_TRUE(g.valid);
  // At the certain path the loss is minimal, so the logit gradient vanishes.
  const Matrix dz = log_softmax_backward(lp, g.grad);
  EXPECT_NEAR(dz(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(dz(0, 1), 0.0, 1e-12);
}

TEST(Ctc, TwoFrameUniformExample) {
  const Matrix lp = Matrix::Constant(2, 2, std::log(0.5));
  const std::vector<int> a = {0};
  EXPECT_NEAR(ctc_loss(lp, a, 1).loss, -std::log(0.75), 1e-12);
}

TEST(Ctc, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(42);
  int instances = 0;
  for (int classes = 2; classes <= 4; ++classes) {
    const int blank = classes - 1;
    std::vector<std::vector<int>> targets;
    all_targets(classes - 1, 3, targets);
    for (int t = 1; t <= 6; ++t) {
      for (const auto& labels : targets) {
        for (int rep = 0; rep < 2; ++rep) {
          const Matrix lp = random_logprobs(t, classes, rng);
          const double expected = brute_force_loss(lp, labels, blank);
          const CtcResult r = ctc_loss(lp, labels, blank);
          ++instances;
          if (std::isinf(expected)) {
            EXPECT_TRUE(std::isinf(r.loss)) << "T=" << t;
            EXPECT_FALSE(r.finite());
            EXPECT_FALSE(ctc_backward(r).valid);
            EXPECT_LT(static_cast<std::size_t>(t), ctc_min_frames(labels));
          } else {
            EXPECT_NEAR(r.loss, expected, 1e-9) << "T=" << t << " classes=" << classes;
            EXPECT_GE(static_cast<std::size_t>(t), ctc_min_frames(labels));
          }
        }
      }
    }
  }
  EXPECT_GT(instances, 700);
}

TEST(Ctc, AlphaBetaGiveLikelihoodAtEveryFrame) {
  std::mt19937_64 rng(5);
  const Matrix lp = random_logprobs(12, 5, rng);
  const std::vector<int> labels = {0, 1, 1, 3};
  const CtcResult r = ctc_loss(lp, labels, 4);
  for (Eigen::Index t = 0; t < lp.rows(); ++t) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < r.tables.log_alpha.cols(); ++s) {
      acc += std::exp(r.tables.log_alpha(t, s) + r.tables.log_beta(t, s));
    }
    EXPECT_NEAR(-std::log(acc), r.loss, 1e-9);
  }
}

class CtcGradientCheck : public ::testing::TestWithParam<int> {};

TEST_P(CtcGradientCheck, MatchesCentralDifferences) {
  std::mt19937_64 rng(100 + GetParam());
  const int t = 3 + GetParam() % 3;  // T in 3..5
  const Matrix lp = random_logprobs(t, 4, rng);
  std::vector<int> labels = {0, 2};
  if (GetParam() % 2) labels = {1, 1};
  const CtcResult r = ctc_loss(lp, labels, 3);
  ASSERT_TRUE(r.finite());
  const CtcGradient g = ctc_backward(r);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    for (Eigen::Index j = 0; j < lp.cols(); ++j) {
      Matrix p = lp, m = lp;
      p(i, j) += h;
      m(i, j) -= h;
      const double fd = (ctc_loss(p, labels, 3).loss - ctc_loss(m, labels, 3).loss) / (2 * h);
      EXPECT_LE(rel_error(g.grad(i, j), fd, 1e-6), 1e-4) << i << "," << j;
    }
  }
}

TEST_P(CtcGradientCheck, LogitGradientRowsSumToZero) {
  std::mt19937_64 rng(200 + GetParam());
  const Matrix lp = random_logprobs(20, 6, rng);
  const std::vector<int> labels = {0, 1, 2, 0};
  const CtcResult r = ctc_loss(lp, labels, 5);
  const Matrix dz = log_softmax_backward(lp, ctc_backward(r).grad);
  for (Eigen::Index t = 0; t < dz.rows(); ++t) EXPECT_NEAR(dz.row(t).sum(), 0.0, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Seeds, CtcGradientCheck, ::testing::Range(0, 5));

TEST(Ctc, InfeasibleTargetIsSentinel) {
  const Matrix lp = Matrix::Constant(2, 3, std::log(1.0 / 3));
  const std::vector<int> labels = {0, 0};  // needs 3 frames
  const CtcResult r = ctc_loss(lp, labels, 2);
  EXPECT_TRUE(std::isinf(r.loss));
  const CtcGradient g = ctc_backward(r);
  EXPECT_FALSE(g.valid);
  EXPECT_TRUE((g.grad.array() == 0.0).all());
  EXPECT_EQ(ctc_min_frames(labels), 3u);
}

TEST(Ctc, RejectsBlankInLabels) {
  const Matrix lp = Matrix::Constant(2, 3, std::log(1.0 / 3));
  const std::vector<int> labels = {2};
  EXPECT_THROW(ctc_loss(lp, labels, 2), ArgumentError);
}
