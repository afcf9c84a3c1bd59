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

// uapkit command-line front end. Every subcommand reads its defaults from an
// optional flat config file; flags given on the command line win.

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifdef UAPKIT_CLI11_SINGLE_HEADER
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include <fmt/format.h>

#include "uapkit/asr.hpp"
#include "uapkit/audio.hpp"
#include "uapkit/corpus.hpp"
#include "uapkit/crafter.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/experiment.hpp"
#include "uapkit/kv_config.hpp"
#include "uapkit/metrics.hpp"
#include "uapkit/perturbation_io.hpp"
#include "uapkit/stream.hpp"
#include "uapkit/synth.hpp"
#include "uapkit/topics.hpp"

namespace fs = std::filesystem;
using namespace uapkit;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
};

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

KeyValueConfig load_config(const Globals& g) {
  KeyValueConfig cfg = g.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(g.config_path);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  if (!g.out_dir.empty()) cfg.set("out_dir", g.out_dir);
  return cfg;
}

// Flag value if given, else config key, else fallback.
std::string pick(const std::string& flag, const KeyValueConfig& cfg, const std::string& key,
                 const std::string& fallback = {}) {
  if (!flag.empty()) return flag;
  return cfg.get_string(key, fallback);
}

// Bundled topic list: working tree first, then the installed copy, then the source tree.
std::string default_topics() {
  for (const char* p : {"data/topics16.txt", UAPKIT_INSTALLED_TOPICS, UAPKIT_SOURCE_TOPICS})
    if (fs::exists(p)) return p;
  return "data/topics16.txt";
}

std::string need(const std::string& value, const std::string& what) {
  if (value.empty()) throw ArgumentError("missing " + what);
  return value;
}

std::vector<AudioClip> clips_of(const Corpus& c) {
  std::vector<AudioClip> out;
  for (const auto& e : c.entries) out.push_back(e.clip);
  return out;
}

Corpus load_manifest(const Globals& g, const fs::path& path, double min_seconds) {
  CorpusLoadOptions opts;
  opts.min_seconds = min_seconds;
  Corpus c = load_corpus(path, opts);
  for (const auto& e : c.errors) note(g, "warning: " + e);
  if (c.skipped_short > 0) note(g, fmt::format("warning: skipped {} clips shorter than {} s", c.skipped_short, min_seconds));
  return c;
}

// --- synth-corpus ---------------------------------------------------------

struct SynthArgs {
  std::string dir;
  std::string topics;
  int train = 400;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  const TopicModel topics = load_topic_model(pick(a.topics, cfg, "topics", default_topics()));
  SynthCorpusOptions opts;
  opts.train_utterances = a.train;
  opts.seed = cfg.get_u64("seed", opts.seed);
  const fs::path dir = need(pick(a.dir, cfg, "out_dir"), "--dir");
  const auto paths = write_synthetic_corpus(dir, topics, opts);
  std::cout << paths.craft_manifest.string() << '\n' << paths.eval_manifest.string() << '\n';
  if (!paths.train_manifest.empty()) std::cout << paths.train_manifest.string() << '\n';
  return kOk;
}

// --- train-asr ------------------------------------------------------------

struct TrainArgs {
  std::string manifest;
  std::string check_manifest;
  std::string out;
  int epochs = -1;
  double step_size = -1;
  int batch = -1;
  double target_wer = -2;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  const Corpus corpus = load_manifest(g, need(pick(a.manifest, cfg, "train_manifest"), "--manifest"), 0.0);
  std::vector<TrainingExample> examples;
  for (const auto& e : corpus.entries) examples.push_back({e.clip, CtcTarget::from_text(e.transcript.text())});

  AsrConfig acfg;
  acfg.seed = cfg.get_u64("seed", acfg.seed);
  SurrogateAsr model(acfg);
  TrainConfig tc;
  tc.epochs = a.epochs >= 0 ? a.epochs : cfg.get_int("train.epochs", 40);
  tc.step_size = a.step_size > 0 ? a.step_size : cfg.get_double("train.step_size", 3e-3);
  tc.batch_size = a.batch > 0 ? a.batch : cfg.get_int("train.batch_size", 8);
  tc.target_wer = a.target_wer > -2 ? a.target_wer : cfg.get_double("train.target_wer", 0.01);
  tc.eval_every = cfg.get_int("train.eval_every", 2);
  tc.on_epoch = [&](int epoch, double loss, double w) {
    note(g, w >= 0 ? fmt::format("epoch {} loss {:.4f} wer {:.4f}", epoch, loss, w)
                   : fmt::format("epoch {} loss {:.4f}", epoch, loss));
  };
  const TrainResult r = train(model, examples, tc);
  const fs::path out = need(pick(a.out, cfg, "model"), "--out");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_model(model, out);
  std::cout << fmt::format("trained {} epochs, training WER {:.4f}\n", r.epochs_run, r.final_wer);

  const std::string check = pick(a.check_manifest, cfg, "eval_manifest");
  if (!check.empty()) {
    const Corpus c = load_manifest(g, check, 0.0);
    double acc = 0.0;
    for (const auto& e : c.entries) acc += wer(e.transcript, transcribe(model, e.clip));
    std::cout << fmt::format("held-out WER {:.4f} over {} clips\n", acc / static_cast<double>(c.entries.size()),
                             c.entries.size());
  }
  return kOk;
}

// --- craft ----------------------------------------------------------------

struct CraftArgs {
  std::string model;
  std::string manifest;
  std::string probe_manifest;
  std::string out;
  double lambda = 100;
  int epochs = -1;
  int batch = -1;
  double alpha = -1;
  double c = -1;
  std::string optimizer;
};

int cmd_craft(const Globals& g, const CraftArgs& a) {
  KeyValueConfig cfg = load_config(g);
  if (a.epochs >= 0) cfg.set("craft.epochs", std::to_string(a.epochs));
  if (a.batch > 0) cfg.set("craft.batch_size", std::to_string(a.batch));
  if (a.alpha > 0) cfg.set("craft.alpha_init", fmt::format("{}", a.alpha));
  if (a.c >= 0) cfg.set("craft.c", fmt::format("{}", a.c));
  if (!a.optimizer.empty()) cfg.set("craft.optimizer", a.optimizer);
  const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  CraftConfig cc = spec.craft;
  cc.lambda_raw = a.lambda;
  cc.validate();

  const SurrogateAsr model = load_model(need(pick(a.model, cfg, "model"), "--model"));
  const Corpus corpus = load_manifest(g, need(pick(a.manifest, cfg, "craft_manifest"), "--manifest"), cc.crop_seconds());
  const auto samples = prepare_craft_samples(model, clips_of(corpus), cc);
  std::vector<CraftSample> probe;
  if (!a.probe_manifest.empty()) {
    const Corpus p = load_manifest(g, a.probe_manifest, cc.crop_seconds());
    probe = prepare_craft_samples(model, clips_of(p), cc);
  }
  note(g, fmt::format("crafting on {} clips, lambda={}, {} epochs", samples.size(), cc.lambda_raw, cc.epochs));
  CraftOutcome out = craft(model, samples, cc, probe);
  if (out.report.untrained_warning) note(g, "warning: surrogate looks untrained (empty clean transcripts)");
  for (double& v : out.delta.clip.samples) v = dequantize_sample(quantize_sample(v));

  const fs::path wav = need(a.out.empty() ? (spec.out_dir / "uap.wav").string() : a.out, "--out");
  if (wav.has_parent_path()) fs::create_directories(wav.parent_path());
  save_perturbation(out.delta, {cc.lambda_raw, cc.l_seconds, cc.sample_rate, cc.hash(), "crafted"}, wav);
  write_report(fs::path(wav).replace_extension(".log.csv"), out.report.csv());
  write_report(fs::path(wav).replace_extension(".summary.json"), out.report.json_summary(cc));
  std::cout << wav.string() << '\n';
  return kOk;
}

// --- baseline -------------------------------------------------------------

struct BaselineArgs {
  std::string kind = "random-edge";
  double lambda = 100;
  double seconds = 3.0;
  std::string out;
};

int cmd_baseline(const Globals& g, const BaselineArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  const std::uint64_t seed = cfg.get_u64("seed", 7);
  Perturbation p;
  if (a.kind == "random-edge") {
    p = random_edge_perturbation(a.lambda, a.seconds, seed);
  } else if (a.kind == "random-integer") {
    p = random_integer_perturbation(a.lambda, a.seconds, seed);
  } else {
    throw ArgumentError("--kind must be random-edge or random-integer");
  }
  const fs::path out = need(a.out, "--out");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_perturbation(p, {a.lambda, a.seconds, p.clip.sample_rate, "", a.kind}, out);
  std::cout << out.string() << '\n';
  return kOk;
}

// --- apply ----------------------------------------------------------------

struct ApplyArgs {
  std::string uap;
  std::string in;
  std::string out;
  double factor = 1.0;
  std::string model;
};

int cmd_apply(const Globals& g, const ApplyArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  if (!(a.factor >= 0.0)) throw ArgumentError("--factor must be nonnegative");
  const Perturbation delta = load_perturbation(need(a.uap, "--uap"));
  const AudioClip clip = read_wav(need(a.in, "--in"));
  const AudioClip noise = tile_to_length(scale(delta.clip, a.factor), clip.samples.size());
  const AudioClip out = mix(clip, noise);
  write_wav(out, need(a.out, "--out"));
  std::cout << fmt::format("snr_db {:.3f}\n", snr_db(clip, noise));
  const std::string model_path = pick(a.model, cfg, "model");
  if (!model_path.empty()) {
    const SurrogateAsr model = load_model(model_path);
    const Transcript clean = transcribe(model, clip);
    const Transcript pert = transcribe(model, out);
    std::cout << "clean:     " << clean.text() << '\n' << "perturbed: " << pert.text() << '\n';
    if (!clean.words.empty()) std::cout << fmt::format("wer {:.4f}\n", wer(clean, pert));
  }
  (void)g;
  return kOk;
}

// --- sweep / scale / e2e --------------------------------------------------

struct ExperimentArgs {
  std::string model;
  std::string topics;
  std::string craft_manifest;
  std::string eval_manifest;
  std::string uap;
};

struct LoadedExperiment {
  ExperimentSpec spec;
  SurrogateAsr model;
  TopicModel topics;
  ExperimentData data;
};

// Fills a caller-owned object: data holds pointers into it.
void load_experiment(LoadedExperiment& x, const Globals& g, const ExperimentArgs& a, bool need_craft) {
  const KeyValueConfig cfg = load_config(g);
  x.spec = ExperimentSpec::from_config(cfg);
  x.model = load_model(need(pick(a.model, cfg, "model"), "--model"));
  x.topics = load_topic_model(pick(a.topics, cfg, "topics", default_topics()));
  const double min_seconds = x.spec.craft.crop_seconds();
  if (need_craft) {
    x.data.craft_clips =
        clips_of(load_manifest(g, need(pick(a.craft_manifest, cfg, "craft_manifest"), "--craft-manifest"), min_seconds));
  }
  x.data.eval = load_manifest(g, need(pick(a.eval_manifest, cfg, "eval_manifest"), "--eval-manifest"), min_seconds).entries;
  x.data.model = &x.model;
  x.data.topics = &x.topics;
  fs::create_directories(x.spec.out_dir);
  write_report(x.spec.out_dir / "spec.cfg", x.spec.to_config_text());
}

int cmd_sweep(const Globals& g, const ExperimentArgs& a) {
  LoadedExperiment x;
  load_experiment(x, g, a, true);
  const SweepReport r = run_amplitude_sweep(x.spec, x.data, [&](const std::string& m) { note(g, m); });
  write_report(x.spec.out_dir / "sweep.csv", r.csv());
  write_report(x.spec.out_dir / "sweep_clips.csv", r.clips_csv());
  write_report(x.spec.out_dir / "sweep.json", r.json(x.spec));
  std::cout << r.csv();
  return kOk;
}

int cmd_scale(const Globals& g, const ExperimentArgs& a) {
  LoadedExperiment x;
  load_experiment(x, g, a, true);
  const ScaleReport r = run_scaling_experiment(x.spec, x.data, [&](const std::string& m) { note(g, m); });
  write_report(x.spec.out_dir / "scale.csv", r.csv());
  write_report(x.spec.out_dir / "scale.json", r.json(x.spec));
  std::cout << r.csv();
  return kOk;
}

int cmd_e2e(const Globals& g, const ExperimentArgs& a) {
  LoadedExperiment x;
  load_experiment(x, g, a, a.uap.empty());
  const Perturbation delta = a.uap.empty() ? obtain_uap(x.spec, x.data, x.spec.e2e_lambda,
                                                        [&](const std::string& m) { note(g, m); })
                                           : load_perturbation(a.uap);
  const EndToEndReport r = run_end_to_end(x.spec, x.data, delta);
  write_report(x.spec.out_dir / "e2e_clips.csv", r.clips_csv());
  write_report(x.spec.out_dir / "e2e_speakers.csv", r.speakers_csv());
  write_report(x.spec.out_dir / "e2e_length.csv", r.length_csv(x.spec.smoothing_window));
  write_report(x.spec.out_dir / "e2e.json", r.json(x.spec));
  std::string logs;
  for (std::size_t i = 0; i < r.command_logs.size(); ++i) {
    logs += fmt::format("# clip {}\n{}", i, r.command_logs[i]);
  }
  write_report(x.spec.out_dir / "e2e_commands.log", logs);
  std::cout << r.speakers_csv();
  return kOk;
}

// --- stream ---------------------------------------------------------------

struct StreamArgs {
  std::string uap;
  std::string control;
  std::string replay;
  std::string log;
  double factor = 1.0;
  std::size_t chunk = 1600;
};

// Follows a control file or FIFO like `tail -f`, forwarding parsed commands.
class ControlReader {
 public:
  ControlReader(const std::string& path, CommandChannel& channel, const Globals& g)
      : channel_(channel), globals_(g) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_NONBLOCK);
    if (fd_ < 0) throw IoError("cannot open control channel " + path);
    thread_ = std::thread([this] { run(); });
  }
  ~ControlReader() {
    done_ = true;
    thread_.join();
    ::close(fd_);
  }
  ControlReader(const ControlReader&) = delete;
  ControlReader& operator=(const ControlReader&) = delete;

 private:
  void run() {
    std::string buf;
    char tmp[512];
    while (!done_) {
      const ssize_t n = ::read(fd_, tmp, sizeof tmp);
      if (n > 0) {
        buf.append(tmp, static_cast<std::size_t>(n));
        for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
          const std::string line = buf.substr(0, nl);
          buf.erase(0, nl + 1);
          if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
          try {
            channel_.push(ControlCommand::parse(line));
          } catch (const Error& e) {
            note(globals_, std::string("ignoring control line: ") + e.what());
          }
        }
        continue;
      }
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  CommandChannel& channel_;
  const Globals& globals_;
  int fd_ = -1;
  std::atomic<bool> done_{false};
  std::thread thread_;
};

int cmd_stream(const Globals& g, const StreamArgs& a) {
  if (a.chunk == 0) throw ArgumentError("--chunk must be positive");
  Injector injector(load_perturbation(need(a.uap, "--uap")), a.factor);
  CommandChannel channel;
  if (!a.replay.empty()) {
    std::ifstream in(a.replay);
    if (!in) throw IoError("cannot open " + a.replay);
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      channel.push(ControlCommand::parse(line));
    }
  }
  std::optional<ControlReader> reader;
  if (!a.control.empty()) reader.emplace(a.control, channel, g);

  const int rate = injector.state().perturbation.clip.sample_rate;
  std::vector<std::int16_t> in(a.chunk);
  std::vector<std::int16_t> out;
  std::size_t total = 0;
  while (!injector.stopped()) {
    const std::size_t got = std::fread(in.data(), sizeof(std::int16_t), in.size(), stdin);
    if (got == 0) break;
    injector.poll(channel);
    if (injector.stopped()) break;
    std::vector<double> s(got);
    for (std::size_t i = 0; i < got; ++i) s[i] = dequantize_sample(in[i]);
    const AudioClip y = injector.process_chunk(AudioClip(std::move(s), rate));
    out.resize(y.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantize_sample(y.samples[i]);
    if (std::fwrite(out.data(), sizeof(std::int16_t), out.size(), stdout) != out.size()) {
      throw StreamError("broken output pipe");
    }
    std::fflush(stdout);
    total += got;
  }
  reader.reset();
  if (!a.log.empty()) write_report(a.log, injector.command_log_text());
  note(g, fmt::format("streamed {} samples", total));
  return kOk;
}

// --- mitigate -------------------------------------------------------------

struct MitigateArgs {
  std::string in;
  std::string out;
  std::string uap;
  std::size_t delta_length = 0;
  double silence_begin = 0.0;
  double silence_end = 0.0;
  std::string model;
};

int cmd_mitigate(const Globals& g, const MitigateArgs& a) {
  const KeyValueConfig cfg = load_config(g);
  const AudioClip clip = read_wav(need(a.in, "--in"));
  std::size_t period = a.delta_length;
  if (period == 0) period = load_perturbation(need(a.uap, "--uap or --delta-length")).clip.samples.size();
  const auto rate = static_cast<double>(clip.sample_rate);
  const SampleRange window{static_cast<std::size_t>(std::llround(a.silence_begin * rate)),
                           static_cast<std::size_t>(std::llround(a.silence_end * rate))};
  const AudioClip cleaned = noise_cancel(clip, period, window);
  write_wav(cleaned, need(a.out, "--out"));
  const std::string model_path = pick(a.model, cfg, "model");
  if (!model_path.empty()) {
    const SurrogateAsr model = load_model(model_path);
    std::cout << "before: " << transcribe(model, clip).text() << '\n'
              << "after:  " << transcribe(model, cleaned).text() << '\n';
  }
  return kOk;
}

// --- report ---------------------------------------------------------------

int cmd_report(const Globals& g, const std::string& dir_flag) {
  const KeyValueConfig cfg = load_config(g);
  const fs::path dir = pick(dir_flag, cfg, "out_dir", "out");
  bool any = false;
  for (const char* name : {"sweep.csv", "scale.csv", "e2e_speakers.csv"}) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    any = true;
    std::ifstream in(p);
    std::cout << "== " << p.string() << '\n' << in.rdbuf() << '\n';
  }
  if (!any) throw IoError("no reports found in " + dir.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uapkit: universal adversarial perturbations against a surrogate speech recognizer"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed overriding the config");
  app.add_option("--out-dir", g.out_dir, "Output directory overriding the config");
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress on stderr");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth-corpus", "Generate the synthetic tone-speech corpus");
  s_synth->add_option("--dir", synth.dir, "Output directory (default: --out-dir)");
  s_synth->add_option("--topics", synth.topics, "Topic model used to compose sentences");
  s_synth->add_option("--train", synth.train, "Short training utterances to write (0 to skip)");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train-asr", "Train the surrogate recognizer");
  s_train->add_option("--manifest", tr.manifest, "Training manifest");
  s_train->add_option("--check-manifest", tr.check_manifest, "Manifest for a held-out WER check");
  s_train->add_option("--out", tr.out, "Checkpoint path");
  s_train->add_option("--epochs", tr.epochs);
  s_train->add_option("--step-size", tr.step_size);
  s_train->add_option("--batch", tr.batch);
  s_train->add_option("--target-wer", tr.target_wer, "Stop once training WER is at or below this");

  CraftArgs cr;
  auto* s_craft = app.add_subcommand("craft", "Craft a universal perturbation");
  s_craft->add_option("--model", cr.model);
  s_craft->add_option("--manifest", cr.manifest, "Crafting manifest");
  s_craft->add_option("--probe-manifest", cr.probe_manifest, "Clips for a per-epoch WER probe");
  s_craft->add_option("--lambda", cr.lambda, "Amplitude bound in 16-bit units");
  s_craft->add_option("--out", cr.out, "Output WAV (a JSON sidecar is written next to it)");
  s_craft->add_option("--epochs", cr.epochs);
  s_craft->add_option("--batch", cr.batch);
  s_craft->add_option("--alpha", cr.alpha, "Initial step size in 16-bit units");
  s_craft->add_option("--c", cr.c, "Weight of the L2 term");
  s_craft->add_option("--optimizer", cr.optimizer)->check(CLI::IsMember({"sign", "adam"}));

  BaselineArgs bl;
  auto* s_base = app.add_subcommand("baseline", "Write a random baseline perturbation");
  s_base->add_option("--kind", bl.kind)->check(CLI::IsMember({"random-edge", "random-integer"}));
  s_base->add_option("--lambda", bl.lambda);
  s_base->add_option("--seconds", bl.seconds);
  s_base->add_option("--out", bl.out)->required();

  ApplyArgs ap;
  auto* s_apply = app.add_subcommand("apply", "Add a tiled perturbation to a WAV file");
  s_apply->add_option("--uap", ap.uap)->required();
  s_apply->add_option("--in", ap.in)->required();
  s_apply->add_option("--out", ap.out)->required();
  s_apply->add_option("--factor", ap.factor, "Amplitude factor");
  s_apply->add_option("--model", ap.model, "Also transcribe clean and perturbed audio");

  ExperimentArgs ex;
  auto add_experiment = [&](CLI::App* s) {
    s->add_option("--model", ex.model);
    s->add_option("--topics", ex.topics);
    s->add_option("--craft-manifest", ex.craft_manifest);
    s->add_option("--eval-manifest", ex.eval_manifest);
  };
  auto* s_sweep = app.add_subcommand("sweep", "Amplitude sweep against random baselines");
  add_experiment(s_sweep);
  auto* s_scale = app.add_subcommand("scale", "Rescale crafted perturbations to other amplitudes");
  add_experiment(s_scale);
  auto* s_e2e = app.add_subcommand("e2e", "Stream the eval corpus through the injector");
  add_experiment(s_e2e);
  s_e2e->add_option("--uap", ex.uap, "Use this perturbation instead of crafting one");

  StreamArgs st;
  auto* s_stream = app.add_subcommand("stream", "Inject into 16-bit PCM from stdin, write to stdout");
  s_stream->add_option("--uap", st.uap)->required();
  s_stream->add_option("--control", st.control, "Control file or FIFO, followed while streaming");
  s_stream->add_option("--replay", st.replay, "Command log to apply at its recorded offsets");
  s_stream->add_option("--log", st.log, "Write the applied commands with sample offsets");
  s_stream->add_option("--factor", st.factor, "Initial amplitude factor");
  s_stream->add_option("--chunk", st.chunk, "Samples per chunk");

  MitigateArgs mi;
  auto* s_mit = app.add_subcommand("mitigate", "Estimate and subtract a periodic perturbation");
  s_mit->add_option("--in", mi.in)->required();
  s_mit->add_option("--out", mi.out)->required();
  s_mit->add_option("--uap", mi.uap, "Perturbation whose length gives the period");
  s_mit->add_option("--delta-length", mi.delta_length, "Period in samples");
  s_mit->add_option("--silence-begin", mi.silence_begin, "Start of the speech-free window, seconds");
  s_mit->add_option("--silence-end", mi.silence_end, "End of the speech-free window, seconds")->required();
  s_mit->add_option("--model", mi.model, "Also transcribe before and after");

  std::string report_dir;
  auto* s_report = app.add_subcommand("report", "Print the reports found in an output directory");
  s_report->add_option("--dir", report_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s_synth) return cmd_synth(g, synth);
    if (*s_train) return cmd_train(g, tr);
    if (*s_craft) return cmd_craft(g, cr);
    if (*s_base) return cmd_baseline(g, bl);
    if (*s_apply) return cmd_apply(g, ap);
    if (*s_sweep) return cmd_sweep(g, ex);
    if (*s_scale) return cmd_scale(g, ex);
    if (*s_e2e) return cmd_e2e(g, ex);
    if (*s_stream) return cmd_stream(g, st);
    if (*s_mit) return cmd_mitigate(g, mi);
    if (*s_report) return cmd_report(g, report_dir);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
