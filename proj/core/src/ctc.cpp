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

#include "uapkit/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

bool CtcResult::finite() const noexcept { return std::isfinite(loss); }

std::size_t ctc_min_frames(std::span<const int> labels) noexcept {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return n;
}

CtcResult ctc_loss(const Matrix& logprobs, std::span<const int> labels, int blank) {
  const Eigen::Index frames = logprobs.rows();
  const Eigen::Index classes = logprobs.cols();
  if (frames == 0) throw ArgumentError("ctc_loss: no frames");
  if (blank < 0 || blank >= classes) throw ArgumentError("ctc_loss: blank index out of range");
  for (int l : labels) {
    if (l < 0 || l >= classes || l == blank) {
      throw ArgumentError("ctc_loss: label " + std::to_string(l) + " is not a non-blank class");
    }
  }

  CtcResult r;
  CtcTables& tb = r.tables;
  tb.num_classes = classes;
  tb.extended.assign(2 * labels.size() + 1, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) tb.extended[2 * i + 1] = labels[i];
  const auto states = static_cast<Eigen::Index>(tb.extended.size());
  auto ext = [&](Eigen::Index s) { return tb.extended[static_cast<std::size_t>(s)]; };
  // Skipping over a blank is allowed only between distinct labels.
  auto can_skip = [&](Eigen::Index s) { return s >= 2 && ext(s) != blank && ext(s) != ext(s - 2); };

  tb.log_alpha = Matrix::Constant(frames, states, kNegInf);
  tb.log_beta = Matrix::Constant(frames, states, kNegInf);

  tb.log_alpha(0, 0) = logprobs(0, blank);
  if (states > 1) tb.log_alpha(0, 1) = logprobs(0, ext(1));
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = tb.log_alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, tb.log_alpha(t - 1, s - 1));
      if (can_skip(s)) acc = log_add(acc, tb.log_alpha(t - 1, s - 2));
      tb.log_alpha(t, s) = acc == kNegInf ? kNegInf : acc + logprobs(t, ext(s));
    }
  }

  tb.log_beta(frames - 1, states - 1) = 0.0;
  if (states > 1) tb.log_beta(frames - 1, states - 2) = 0.0;
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = tb.log_beta(t + 1, s) + logprobs(t + 1, ext(s));
      if (s + 1 < states) acc = log_add(acc, tb.log_beta(t + 1, s + 1) + logprobs(t + 1, ext(s + 1)));
      if (s + 2 < states && can_skip(s + 2)) {
        acc = log_add(acc, tb.log_beta(t + 1, s + 2) + logprobs(t + 1, ext(s + 2)));
      }
      tb.log_beta(t, s) = std::isnan(acc) ? kNegInf : acc;
    }
  }

  double ll = tb.log_alpha(frames - 1, states - 1);
  if (states > 1) ll = log_add(ll, tb.log_alpha(frames - 1, states - 2));
  tb.log_likelihood = ll;
  r.loss = ll == kNegInf ? std::numeric_limits<double>::infinity() : -ll;
  return r;
}

CtcGradient ctc_backward(const CtcResult& result) {
  const CtcTables& tb = result.tables;
  CtcGradient g;
  g.grad = Matrix::Zero(tb.log_alpha.rows(), tb.num_classes);
  if (!result.finite()) {
    g.valid = false;
    return g;
  }
  const auto states = static_cast<Eigen::Index>(tb.extended.size());
  for (Eigen::Index t = 0; t < tb.log_alpha.rows(); ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      const double occ = tb.log_alpha(t, s) + tb.log_beta(t, s);
      if (occ == kNegInf) continue;
      g.grad(t, tb.extended[static_cast<std::size_t>(s)]) -= std::exp(occ - tb.log_likelihood);
    }
  }
  return g;
}

}  // namespace uapkit
