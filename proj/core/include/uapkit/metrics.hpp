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
#include <string>
#include <vector>

#include "uapkit/transcript.hpp"

namespace uapkit {

struct TopicScore {
  std::string topic;
  double confidence = 0.0;  // in [0, 1]

  bool operator==(const TopicScore&) const = default;
};

// Sorted by confidence, highest first; topic names unique.
using TopicList = std::vector<TopicScore>;

// Word-level Levenshtein distance over |reference|. Can exceed 1.
// Throws ArgumentError on an empty reference.
double wer(const Transcript& reference, const Transcript& hypothesis);

// Unit-cost edit distance between two token sequences.
std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct RecallScore {
  double value = 1.0;
  bool empty_reference = false;  // clean list was empty; value is 1 by convention
};

// |top-k(clean) & top-k(perturbed)| / min(k, |clean|).
RecallScore recall_at_k(const TopicList& clean, const TopicList& perturbed, std::size_t k = 10);

// Matched DCG over the DCG of the whole perturbed top-k, gain 2^t - 1 and
// discount log2(i + 1). A perturbed topic counts as matched when it also
// appears in the clean top-k. 0/0 is 0.
double ndcg_at_k(const TopicList& clean, const TopicList& perturbed, std::size_t k = 10);

// Lowercased, whitespace-trimmed topic name used for matching.
std::string canonical_topic(const std::string& name);

}  // namespace uapkit
