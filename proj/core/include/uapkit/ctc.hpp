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

#include <span>
#include <vector>

#include "uapkit/matrix.hpp"

namespace uapkit {

// Forward-backward lattice of one utterance, in natural-log space.
//
// The label is extended with blanks to length S = 2|labels| + 1. alpha(t, s)
// includes the emission at frame t; beta(t, s) covers frames t+1..T-1 only,
// so sum_s exp(alpha(t,s) + beta(t,s)) equals the total likelihood at every t.
struct CtcTables {
  Matrix log_alpha;           // T x S
  Matrix log_beta;            // T x S
  std::vector<int> extended;  // blank-augmented label, size S
  Eigen::Index num_classes = 0;
  double log_likelihood = 0.0;
};

struct CtcResult {
  double loss = 0.0;  // -log p(labels | logprobs); +inf when no path exists
  CtcTables tables;

  bool finite() const noexcept;
};

struct CtcGradient {
  Matrix grad;        // T x classes, d loss / d logprobs
  bool valid = true;  // false for the infinite-loss sentinel (grad is zero)
};

// Fewest frames that can emit `labels`: one per label plus one blank between
// each pair of equal neighbours.
std::size_t ctc_min_frames(std::span<const int> labels) noexcept;

// logprobs: T x classes, each row a log distribution (not required for the
// recursion itself). labels must not contain `blank`.
CtcResult ctc_loss(const Matrix& logprobs, std::span<const int> labels, int blank);

CtcGradient ctc_backward(const CtcResult& result);

}  // namespace uapkit
