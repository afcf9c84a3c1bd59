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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "uapkit/corpus.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/kv_config.hpp"
#include "uapkit/synth.hpp"

namespace fs = std::filesystem;
using namespace uapkit;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("uapkit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

void write_clip(const fs::path& dir, const std::string& stem, double seconds, const std::string& text) {
  write_wav(AudioClip(std::vector<double>(static_cast<std::size_t>(seconds * kDefaultSampleRate), 0.01)),
            dir / (stem + ".wav"));
  write_file(dir / (stem + ".txt"), text);
}

TopicModel bundled() { return load_topic_model(fs::path(UAPKIT_DATA_DIR) / "topics16.txt"); }

}  // namespace

TEST(Corpus, LoadsManifestEntries) {
  const fs::path d = fresh_dir("corpus_ok");
  write_clip(d, "a", 9.5, "Hello  World");
  write_clip(d, "b", 10.0, "more words");
  write_file(d / "m.tsv", "# wav\ttxt\tspeaker\ttopic\na.wav\ta.txt\ts1\tsport\n\nb.wav\tb.txt\ts2\tnone\n");
  const Corpus c = load_corpus(d / "m.tsv");
  ASSERT_EQ(c.entries.size(), 2u);
  EXPECT_EQ(c.entries[0].transcript.text(), "hello world");
  EXPECT_EQ(c.entries[1].speaker_id, "s2");
  EXPECT_TRUE(c.errors.empty());
}

TEST(Corpus, SkipsShortClipsAndAbortsWhenNoneRemain) {
  const fs::path d = fresh_dir("corpus_short");
  write_clip(d, "a", 9.5, "x");
  write_clip(d, "b", 2.0, "y");
  write_file(d / "m.tsv", "a.wav\ta.txt\ts\tt\nb.wav\tb.txt\ts\tt\n");
  const Corpus c = load_corpus(d / "m.tsv");
  EXPECT_EQ(c.entries.size(), 1u);
  EXPECT_EQ(c.skipped_short, 1u);
  write_file(d / "short.tsv", "b.wav\tb.txt\ts\tt\n");
  EXPECT_THROW(load_corpus(d / "short.tsv"), FormatError);
}

TEST(Corpus, MissingFilesAreErrors) {
  const fs::path d = fresh_dir("corpus_missing");
  EXPECT_THROW(load_corpus(d / "absent.tsv"), IoError);
  write_clip(d, "a", 9.5, "x");
  write_file(d / "m.tsv", "a.wav\ta.txt\ts\tt\nnope.wav\ta.txt\ts\tt\n");
  EXPECT_THROW(load_corpus(d / "m.tsv"), FormatError);
  CorpusLoadOptions lenient;
  lenient.max_error_fraction = 0.5;
  const Corpus c = load_corpus(d / "m.tsv", lenient);
  EXPECT_EQ(c.entries.size(), 1u);
  ASSERT_EQ(c.errors.size(), 1u);
  EXPECT_NE(c.errors[0].find(":2:"), std::string::npos);
  write_file(d / "bad.tsv", "a.wav\ta.txt\n");
  EXPECT_THROW(load_corpus(d / "bad.tsv"), FormatError);
  write_file(d / "empty.tsv", "# nothing\n");
  EXPECT_THROW(load_corpus(d / "empty.tsv"), FormatError);
}

TEST(Synth, SpeechIsDeterministic) {
  const SynthVoice v = default_voices().front();
  EXPECT_EQ(synthesize_speech("market budget", v, 5), synthesize_speech("market budget", v, 5));
  EXPECT_NE(synthesize_speech("market budget", v, 5), synthesize_speech("market budget", v, 6));
  SynthOptions quiet;
  quiet.background_noise = false;
  quiet.total_seconds = 2.0;
  const AudioClip c = synthesize_speech("tax", v, 1, quiet);
  EXPECT_EQ(c.size(), 32000u);
  for (std::size_t i = 0; i < static_cast<std::size_t>(0.2 * kDefaultSampleRate); ++i) ASSERT_EQ(c.samples[i], 0.0);
  EXPECT_GT(linf_norm(c.samples), 0.0);
  EXPECT_LE(speech_seconds_upper_bound("tax", v) + 0.2, 2.0);
}

TEST(Synth, TrainingSetShape) {
  TrainingSetOptions o;
  o.utterances = 12;
  const auto a = synthesize_training_set(bundled(), o);
  const auto b = synthesize_training_set(bundled(), o);
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].clip, b[i].clip);
    EXPECT_EQ(a[i].text, b[i].text);
    const std::size_t words = Transcript::from_text(a[i].text).size();
    EXPECT_GE(words, 1u);
    EXPECT_LE(words, 4u);
  }
}

TEST(Synth, CorpusFilesLoad) {
  const fs::path d = fresh_dir("synth_corpus");
  SynthCorpusOptions o;
  o.craft_clips = 2;
  o.eval_clips = 2;
  o.train_utterances = 3;
  const SynthCorpusPaths p = write_synthetic_corpus(d, bundled(), o);
  const Corpus craft = load_corpus(p.craft_manifest);
  EXPECT_EQ(craft.entries.size(), 2u);
  for (const auto& e : craft.entries) EXPECT_GE(e.clip.seconds(), 9.0);
  EXPECT_EQ(load_corpus(p.eval_manifest).entries.size(), 2u);
  CorpusLoadOptions any;
  any.min_seconds = 0.0;
  EXPECT_EQ(load_corpus(p.train_manifest, any).entries.size(), 3u);
}

TEST(KeyValue, ParsesTypedValues) {
  const KeyValueConfig c = KeyValueConfig::parse(
      "# header\nseed = 42\nname = run one  # trailing\nflag=on\nlist = 1, 2 3\nx = 0.5\n");
  EXPECT_EQ(c.get_u64("seed", 0), 42u);
  EXPECT_EQ(c.get_int("seed", 0), 42);
  EXPECT_EQ(c.get_string("name", ""), "run one");
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_doubles("list", {}), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(c.get_double("x", 0), 0.5);
  EXPECT_EQ(c.get_double("missing", 7.0), 7.0);
  EXPECT_THROW(c.get_int("name", 0), ConfigError);
  EXPECT_THROW(c.get_bool("x", false), ConfigError);
}

TEST(KeyValue, ErrorsCarryLineNumbers) {
  try {
    KeyValueConfig::parse("a = 1\nbroken\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(KeyValueConfig::parse("= 3\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/file.cfg"), IoError);
}
