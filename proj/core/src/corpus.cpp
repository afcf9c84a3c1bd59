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

#include "uapkit/corpus.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return out;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& manifest, const CorpusLoadOptions& opts) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  Corpus corpus;
  corpus.manifest_path = manifest;
  const auto base = manifest.parent_path();
  std::string line;
  int line_no = 0;
  std::size_t listed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    ++listed;
    try {
      const auto f = split_tabs(line);
      if (f.size() != 4) throw FormatError(fmt::format("expected 4 tab-separated fields, got {}", f.size()));
      if (f[2].empty()) throw FormatError("empty speaker id");
      CorpusEntry e;
      e.wav_path = base / f[0];
      e.clip = read_wav(e.wav_path);
      e.transcript = Transcript::from_text(read_text(base / f[1]));
      e.speaker_id = f[2];
      e.topic = f[3];
      if (e.clip.sample_rate != kDefaultSampleRate) {
        throw UnsupportedFormatError(fmt::format("{}: {} Hz, expected {} Hz", e.wav_path.string(),
                                                 e.clip.sample_rate, kDefaultSampleRate));
      }
      if (e.clip.seconds() < opts.min_seconds) {
        ++corpus.skipped_short;
        continue;
      }
      corpus.entries.push_back(std::move(e));
    } catch (const Error& err) {
      corpus.errors.push_back(fmt::format("{}:{}: {}", manifest.string(), line_no, err.what()));
    }
  }
  if (listed == 0) throw FormatError(manifest.string() + ": manifest lists no entries");
  if (static_cast<double>(corpus.errors.size()) > opts.max_error_fraction * static_cast<double>(listed)) {
    throw FormatError(fmt::format("{}: {} of {} entries failed to load; first: {}", manifest.string(),
                                  corpus.errors.size(), listed, corpus.errors.front()));
  }
  if (corpus.entries.empty()) {
    throw FormatError(fmt::format("{}: no usable entries ({} shorter than {:.2f} s)", manifest.string(),
                                  corpus.skipped_short, opts.min_seconds));
  }
  return corpus;
}

}  // namespace uapkit
