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

#include "uapkit/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "uapkit/alphabet.hpp"
#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

}  // namespace

void TopicModel::validate() const {
  if (topics.size() < 2) throw ConfigError("topic model needs at least 2 topics");
  if (smoothing < 0.0) throw ConfigError("topic model smoothing must be nonnegative");
  for (const auto& [name, keywords] : topics) {
    if (keywords.empty()) throw ConfigError("topic '" + name + "' has no keywords");
    for (const auto& [kw, w] : keywords) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("keyword '" + kw + "' has a nonpositive weight");
    }
  }
}

TopicModel parse_topic_model(std::string_view text) {
  TopicModel model;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError("expected 'topic: keyword, ...'", line_no);
    const std::string name = canonical_topic(line.substr(0, colon));
    if (name.empty()) throw ConfigError("empty topic name", line_no);
    if (model.topics.count(name) != 0) throw ConfigError("duplicate topic '" + name + "'", line_no);

    std::map<std::string, double> keywords;
    for (std::string_view item : split(std::string_view(line).substr(colon + 1), ',')) {
      const std::string entry = trim(item);
      if (entry.empty()) continue;
      const auto fields = split(entry, ':');
      if (fields.size() > 2) throw ConfigError("malformed keyword entry '" + entry + "'", line_no);
      const std::string kw = normalize_text(trim(fields[0]));
      if (kw.empty() || kw.find(' ') != std::string::npos) {
        throw ConfigError("keyword '" + entry + "' must be a single word", line_no);
      }
      double weight = 1.0;
      if (fields.size() == 2) {
        const std::string w = trim(fields[1]);
        std::size_t used = 0;
        try {
          weight = std::stod(w, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != w.size()) throw ConfigError("bad weight '" + w + "'", line_no);
      }
      if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw ConfigError("keyword '" + kw + "' has a nonpositive weight", line_no);
      }
      if (!keywords.emplace(kw, weight).second) {
        throw ConfigError("duplicate keyword '" + kw + "' in topic '" + name + "'", line_no);
      }
    }
    if (keywords.empty()) throw ConfigError("topic '" + name + "' has no keywords", line_no);
    model.topics.emplace(name, std::move(keywords));
  }
  if (model.topics.empty()) throw ConfigError("topic file defines no topics");
  model.validate();
  return model;
}

TopicModel load_topic_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_topic_model(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_topic_model(const TopicModel& model) {
  std::string out;
  for (const auto& [name, keywords] : model.topics) {
    out += name + ":";
    bool first = true;
    for (const auto& [kw, w] : keywords) {
      out += first ? " " : ", ";
      first = false;
      out += kw;
      if (w != 1.0) out += fmt::format(":{}", w);
    }
    out += '\n';
  }
  return out;
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_topic_model(model);
}

TopicList detect(const TopicModel& model, const Transcript& transcript, std::size_t k) {
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& [name, keywords] : model.topics) {
    double score = 0.0;
    for (const auto& word : transcript.words) {
      const auto it = keywords.find(word);
      if (it != keywords.end()) score += it->second;
    }
    if (score > 0.0) scored.emplace_back(name, score);
  }
  // std::map iteration is already name-ordered, so a stable sort keeps the
  // lexicographic tie-break.
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  TopicList out;
  if (scored.empty()) return out;
  const double top = scored.front().second + model.smoothing;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) {
    out.push_back({scored[i].first, (scored[i].second + model.smoothing) / top});
  }
  return out;
}

}  // namespace uapkit
