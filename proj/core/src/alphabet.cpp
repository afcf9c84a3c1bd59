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

#include "uapkit/alphabet.hpp"

#include <cctype>

#include "uapkit/errors.hpp"
#include "uapkit/transcript.hpp"

namespace uapkit {

int Alphabet::index_of(char c) noexcept {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c == ' ') return 26;
  if (c == '\'') return 27;
  return -1;
}

char Alphabet::symbol(int index) {
  if (index < 0 || index >= kBlank) throw ArgumentError("Alphabet::symbol: index out of range");
  return kSymbols[static_cast<std::size_t>(index)];
}

CtcTarget CtcTarget::from_text(std::string_view text) {
  CtcTarget t;
  t.text = normalize_text(text);
  if (t.text.empty()) throw ArgumentError("CtcTarget: transcript is empty after normalization");
  t.labels.reserve(t.text.size());
  for (char c : t.text) t.labels.push_back(Alphabet::index_of(c));
  return t;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (Alphabet::index_of(c) < 0) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Transcript Transcript::from_text(std::string_view text) {
  Transcript t;
  const std::string norm = normalize_text(text);
  std::size_t pos = 0;
  while (pos < norm.size()) {
    const std::size_t end = norm.find(' ', pos);
    const std::size_t stop = end == std::string::npos ? norm.size() : end;
    if (stop > pos) t.words.emplace_back(norm.substr(pos, stop - pos));
    pos = stop + 1;
  }
  return t;
}

std::string Transcript::text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace uapkit
