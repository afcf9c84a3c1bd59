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

// Character inventory of the recognizer: a-z, space, apostrophe, then blank.
class Alphabet {
 public:
  static constexpr int kSize = 29;
  static constexpr int kBlank = 28;
  static constexpr std::string_view kSymbols = "abcdefghijklmnopqrstuvwxyz '";

  // -1 for characters outside the alphabet.
  static int index_of(char c) noexcept;
  static char symbol(int index);
};

// Label sequence for CTC, over non-blank indices.
struct CtcTarget {
  std::vector<int> labels;
  std::string text;

  // Normalizes `text` first; throws ArgumentError if nothing remains.
  static CtcTarget from_text(std::string_view text);
};

}  // namespace uapkit
