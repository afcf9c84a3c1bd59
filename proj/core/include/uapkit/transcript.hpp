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

#include <string>
#include <string_view>
#include <vector>

namespace uapkit {

// Lowercase, drop characters outside [a-z '], collapse whitespace runs and trim.
std::string normalize_text(std::string_view text);

// Ordered word tokens; each token is nonempty and drawn from [a-z'].
struct Transcript {
  std::vector<std::string> words;

  static Transcript from_text(std::string_view text);

  std::string text() const;
  bool empty() const noexcept { return words.empty(); }
  std::size_t size() const noexcept { return words.size(); }
  bool operator==(const Transcript&) const = default;
};

}  // namespace uapkit
