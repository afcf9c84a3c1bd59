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

#include "uapkit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

std::set<std::string> top_names(const TopicList& list, std::size_t k) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < std::min(k, list.size()); ++i) names.insert(canonical_topic(list[i].topic));
  return names;
}

}  // namespace

std::string canonical_topic(const std::string& name) {
  std::size_t b = 0;
  std::size_t e = name.size();
  while (b < e && std::isspace(static_cast<unsigned char>(name[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(name[e - 1]))) --e;
  std::string out = name.substr(b, e - b);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double wer(const Transcript& reference, const Transcript& hypothesis) {
  if (reference.empty()) throw ArgumentError("wer: empty reference transcript");
  return static_cast<double>(edit_distance(reference.words, hypothesis.words)) /
         static_cast<double>(reference.size());
}

RecallScore recall_at_k(const TopicList& clean, const TopicList& perturbed, std::size_t k) {
  RecallScore r;
  if (clean.empty() || k == 0) {
    r.empty_reference = true;
    return r;
  }
  const auto clean_top = top_names(clean, k);
  const auto pert_top = top_names(perturbed, k);
  std::size_t shared = 0;
  for (const auto& name : pert_top) shared += clean_top.count(name);
  r.value = static_cast<double>(shared) / static_cast<double>(std::min(k, clean.size()));
  return r;
}

double ndcg_at_k(const TopicList& clean, const TopicList& perturbed, std::size_t k) {
  const auto clean_top = top_names(clean, k);
  const std::size_t n = std::min(k, perturbed.size());
  double matched = 0.0;
  double ideal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gain = (std::exp2(perturbed[i].confidence) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    ideal += gain;
    if (clean_top.count(canonical_topic(perturbed[i].topic)) != 0) matched += gain;
  }
  return ideal > 0.0 ? matched / ideal : 0.0;
}

}  // namespace uapkit
