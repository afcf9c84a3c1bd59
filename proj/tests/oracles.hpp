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

// Brute-force and direct-formula oracles shared by the unit and acceptance
// tests. None of them reuse library code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "uapkit/matrix.hpp"
#include "uapkit/metrics.hpp"

namespace uapkit::testing {

inline Matrix random_logprobs(Eigen::Index t, Eigen::Index c, std::mt19937_64& rng, double spread = 2.0) {
  std::normal_distribution<double> d(0.0, spread);
  Matrix logits(t, c);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < c; ++j) logits(i, j) = d(rng);
  for (Eigen::Index i = 0; i < t; ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    logits.row(i).array() -= lse;
  }
  return logits;
}

inline std::vector<int> collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != blank) out.push_back(s);
    prev = s;
  }
  return out;
}

// -log of the summed probability of every frame path that collapses to labels.
inline double brute_force_loss(const Matrix& lp, const std::vector<int>& labels, int blank) {
  const auto t = static_cast<int>(lp.rows());
  const auto c = static_cast<int>(lp.cols());
  long double total = 0.0L;
  std::vector<int> path(static_cast<std::size_t>(t), 0);
  std::function<void(int, long double)> walk = [&](int pos, long double logp) {
    if (pos == t) {
      if (collapse(path, blank) == labels) total += std::exp(logp);
      return;
    }
    for (int s = 0; s < c; ++s) {
      path[static_cast<std::size_t>(pos)] = s;
      walk(pos + 1, logp + lp(pos, s));
    }
  };
  walk(0, 0.0L);
  return total > 0 ? static_cast<double>(-std::log(total)) : std::numeric_limits<double>::infinity();
}

inline void all_targets(int symbols, int max_len, std::vector<std::vector<int>>& out) {
  std::vector<std::vector<int>> frontier = {{}};
  out.push_back({});
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> next;
    for (const auto& f : frontier) {
      for (int s = 0; s < symbols; ++s) {
        auto g = f;
        g.push_back(s);
        next.push_back(g);
        out.push_back(g);
      }
    }
    frontier = std::move(next);
  }
}

// Memoized recursion over suffixes; shares nothing with the library's table.
inline std::size_t edit_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = std::min({go(i + 1, j) + 1, go(i, j + 1) + 1, go(i + 1, j + 1) + (a[i] != b[j])});
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

inline double ndcg_oracle(const TopicList& clean, const TopicList& pert, std::size_t k) {
  std::set<std::string> top;
  for (std::size_t i = 0; i < std::min(k, clean.size()); ++i) top.insert(clean[i].topic);
  const std::size_t n = std::min(k, pert.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double gain = (std::pow(2.0, pert[i - 1].confidence) - 1.0) / std::log2(static_cast<double>(i) + 1.0);
    den += gain;
    if (top.count(pert[i - 1].topic)) num += gain;
  }
  return den == 0.0 ? 0.0 : num / den;
}

inline TopicList random_list(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<std::string> names;
  for (int i = 0; i < 16; ++i) names.push_back("topic" + std::to_string(i));
  std::shuffle(names.begin(), names.end(), rng);
  TopicList out(len(rng));
  std::vector<double> c(out.size());
  for (double& v : c) v = conf(rng);
  std::sort(c.rbegin(), c.rend());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {names[i], c[i]};
  return out;
}

inline double recall_oracle(const TopicList& clean, const TopicList& pert, std::size_t k) {
  std::set<std::string> a, b;
  for (std::size_t i = 0; i < std::min(k, clean.size()); ++i) a.insert(clean[i].topic);
  for (std::size_t i = 0; i < std::min(k, pert.size()); ++i) b.insert(pert[i].topic);
  if (a.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  return static_cast<double>(common) / static_cast<double>(a.size());
}

}  // namespace uapkit::testing
