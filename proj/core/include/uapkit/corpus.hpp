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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uapkit/audio.hpp"
#include "uapkit/transcript.hpp"

namespace uapkit {

struct CorpusEntry {
  AudioClip clip;
  Transcript transcript;
  std::string speaker_id;
  std::string topic;
  std::filesystem::path wav_path;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  std::filesystem::path manifest_path;
  std::vector<std::string> errors;  // one line per entry that failed to load
  std::size_t skipped_short = 0;    // well-formed entries below min_seconds
};

struct CorpusLoadOptions {
  double min_seconds = 9.0;         // shorter clips are skipped, never padded
  double max_error_fraction = 0.1;  // abort above this share of failed entries
};

// Manifest: one entry per line,
//   wav-path<TAB>transcript-path<TAB>speaker-id<TAB>topic
// Relative paths resolve against the manifest's directory. Blank lines and
// lines starting with '#' are ignored.
Corpus load_corpus(const std::filesystem::path& manifest, const CorpusLoadOptions& opts = {});

}  // namespace uapkit
