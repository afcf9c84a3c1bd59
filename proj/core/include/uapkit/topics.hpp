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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "uapkit/metrics.hpp"
#include "uapkit/transcript.hpp"

namespace uapkit {

// Keyword-weighted topics. Immutable once loaded.
//
// File format, one topic per line:
//   topic-name: keyword[:weight], keyword[:weight], ...
// Weights default to 1. Blank lines and lines starting with '#' are ignored.
struct TopicModel {
  std::map<std::string, std::map<std::string, double>> topics;
  double smoothing = 0.0;

  void validate() const;
};

TopicModel parse_topic_model(std::string_view text);
TopicModel load_topic_model(const std::filesystem::path& path);
std::string format_topic_model(const TopicModel& model);
void save_topic_model(const TopicModel& model, const std::filesystem::path& path);

// Bag-of-words scoring: a topic's score is the summed weight of transcript
// tokens found in its keyword set. Confidences are (score + smoothing) over
// (max score + smoothing); ties go to the lexicographically smaller name.
// Only topics with a positive score are listed.
TopicList detect(const TopicModel& model, const Transcript& transcript, std::size_t k = 10);

}  // namespace uapkit
