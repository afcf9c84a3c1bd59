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

// Runs the uapkit executable as a subprocess.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uapkit/audio.hpp"
#include "uapkit/perturbation_io.hpp"

namespace fs = std::filesystem;
using namespace uapkit;

namespace {

const fs::path kTestData = UAPKIT_TESTDATA_DIR;

fs::path work_dir() {
  const fs::path d = kTestData / "cli_test";
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + UAPKIT_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_raw(const fs::path& p, const std::vector<std::int16_t>& v) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(v.data()),
                                           static_cast<std::streamsize>(v.size() * sizeof(std::int16_t)));
}

std::vector<std::int16_t> read_raw(const fs::path& p) {
  const std::string s = slurp(p);
  std::vector<std::int16_t> v(s.size() / sizeof(std::int16_t));
  std::memcpy(v.data(), s.data(), v.size() * sizeof(std::int16_t));
  return v;
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("baseline --kind sideways --lambda 100 --out " + (work_dir() / "x.wav").string()), 1);
  EXPECT_EQ(run("apply --uap /nonexistent.wav --in /nonexistent.wav --out /tmp/x.wav"), 2);
  EXPECT_EQ(run("sweep --config /nonexistent.cfg"), 1);
  EXPECT_EQ(run("sweep --model /nonexistent.bin --craft-manifest /x.tsv --eval-manifest /y.tsv --out-dir " +
                (work_dir() / "none").string()),
            2);
}

TEST(Cli, BaselineAndApply) {
  const fs::path d = work_dir();
  ASSERT_EQ(run("baseline --kind random-edge --lambda 120 --seconds 0.5 --seed 3 --out " + (d / "edge.wav").string()), 0);
  PerturbationMeta meta;
  const Perturbation p = load_perturbation(d / "edge.wav", &meta);
  EXPECT_EQ(meta.kind, "random-edge");
  EXPECT_EQ(p.clip.size(), 8000u);
  for (double v : p.clip.samples) ASSERT_EQ(std::abs(norm_to_raw(v)), 120.0);

  write_wav(AudioClip(std::vector<double>(20000, 0.0)), d / "silence.wav");
  ASSERT_EQ(run("apply --uap " + (d / "edge.wav").string() + " --in " + (d / "silence.wav").string() + " --out " +
                (d / "applied.wav").string() + " --factor 0.5"),
            0);
  const AudioClip out = read_wav(d / "applied.wav");
  ASSERT_EQ(out.size(), 20000u);
  for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(norm_to_raw(out.samples[i]), 0.5 * norm_to_raw(p.clip.samples[i % 8000]));
}

TEST(Cli, StreamMatchesOfflineAndLogsCommands) {
  const fs::path d = work_dir();
  ASSERT_EQ(run("baseline --kind random-integer --lambda 200 --seconds 0.1 --seed 9 --out " + (d / "int.wav").string()), 0);
  const Perturbation p = load_perturbation(d / "int.wav");
  std::vector<std::int16_t> in(10000);
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<std::int16_t>((i * 37) % 2001 - 1000);
  write_raw(d / "in.raw", in);
  std::ofstream(d / "replay.txt") << "# replay\n@4000 amp 0\n";
  const std::string cmd = std::string("\"") + UAPKIT_CLI + "\" -q stream --uap " + (d / "int.wav").string() +
                          " --chunk 1000 --replay " + (d / "replay.txt").string() + " --log " +
                          (d / "cmd.log").string() + " < " + (d / "in.raw").string() + " > " +
                          (d / "out.raw").string();
  ASSERT_EQ(run_shell(cmd), 0);
  const auto out = read_raw(d / "out.raw");
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double delta = i < 4000 ? norm_to_raw(p.clip.samples[i % p.clip.size()]) : 0.0;
    ASSERT_EQ(out[i], static_cast<std::int16_t>(in[i] + delta)) << i;
  }
  EXPECT_EQ(slurp(d / "cmd.log"), "@4000 amp 0\n");
}

TEST(Cli, SynthCorpusIsDeterministic) {
  const fs::path d = work_dir();
  const std::string topics = std::string(UAPKIT_DATA_DIR) + "/topics16.txt";
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run("-q synth-corpus --train 0 --topics " + topics + " --dir " + (d / sub).string()), 0);
  }
  EXPECT_EQ(slurp(d / "a" / "craft.tsv"), slurp(d / "b" / "craft.tsv"));
  EXPECT_TRUE(slurp(d / "a" / "craft" / "craft_00.wav") == slurp(d / "b" / "craft" / "craft_00.wav"));
}
