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
#include <functional>
#include <string>
#include <vector>

#include "uapkit/asr.hpp"
#include "uapkit/corpus.hpp"
#include "uapkit/crafter.hpp"
#include "uapkit/kv_config.hpp"
#include "uapkit/metrics.hpp"
#include "uapkit/topics.hpp"

namespace uapkit {

struct ExperimentSpec {
  // Crafting settings shared by every sweep point; lambda_raw is overwritten
  // per point. Batch and epoch defaults are sized for the 16-clip corpus.
  CraftConfig craft = [] {
    CraftConfig c;
    c.epochs = 20;
    c.batch_size = 4;
    return c;
  }();
  std::vector<double> lambdas = {70, 100, 150, 200, 300, 400};
  std::vector<double> scale_sources = {100};
  std::vector<double> scale_targets = {70, 150, 200, 300, 400};
  bool baselines = true;
  std::uint64_t baseline_seed = 7;
  std::size_t top_k = 10;
  bool reuse_uaps = true;  // load out_dir/uap_<lambda>.wav when its config hash matches

  // End-to-end streaming run.
  double e2e_lambda = 150;
  std::size_t e2e_chunk_samples = 1600;
  double e2e_amplitude = 1.0;
  bool e2e_vad = false;
  double e2e_vad_threshold = 1e-5;
  std::size_t smoothing_window = 20;

  std::filesystem::path out_dir = "out";

  void validate() const;
  static ExperimentSpec from_config(const KeyValueConfig& cfg);
  // Flat key=value rendering of every field; parsing it gives back the spec.
  std::string to_config_text() const;
};

// Everything an experiment needs besides the spec.
struct ExperimentData {
  const SurrogateAsr* model = nullptr;
  const TopicModel* topics = nullptr;
  std::vector<AudioClip> craft_clips;
  std::vector<CorpusEntry> eval;
};

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MetricStats summarize(const std::vector<double>& values);

struct ClipMetrics {
  std::size_t index = 0;
  std::string clip;  // WAV file stem
  std::string speaker;
  double seconds = 0.0;
  double wer = 0.0;
  double recall = 1.0;
  double ndcg = 1.0;
  double snr_db = 0.0;
  bool empty_clean_topics = false;
};

struct PerturbationEval {
  double lambda = 0.0;
  std::string kind;  // crafted, random-integer, random-edge, scaled, control
  std::vector<ClipMetrics> clips;
  MetricStats wer, recall, ndcg, snr_db;
};

// Clean transcripts and topic lists of the eval set, computed once.
struct CleanReference {
  std::vector<Transcript> transcripts;
  std::vector<TopicList> topics;
};

CleanReference clean_reference(const ExperimentData& data, std::size_t top_k);

// Adds factor * tile(delta) to every eval clip and scores the result against
// the clean reference.
PerturbationEval evaluate_perturbation(const ExperimentData& data, const CleanReference& clean,
                                       const Perturbation& delta, double factor, std::size_t top_k);

using ProgressFn = std::function<void(const std::string&)>;

// Crafts a UAP at lambda, or loads the cached one from spec.out_dir when its
// sidecar hash matches. The result is saved back to the cache.
Perturbation obtain_uap(const ExperimentSpec& spec, const ExperimentData& data, double lambda,
                        const ProgressFn& progress = {});

std::filesystem::path uap_path(const std::filesystem::path& dir, double lambda);

struct SweepReport {
  PerturbationEval control;  // factor 0
  std::vector<PerturbationEval> rows;

  std::string csv() const;        // lambda,kind,metric,mean,std
  std::string clips_csv() const;  // one line per (lambda, kind, clip)
  std::string json(const ExperimentSpec& spec) const;
  const PerturbationEval* find(double lambda, const std::string& kind) const;
};

SweepReport run_amplitude_sweep(const ExperimentSpec& spec, const ExperimentData& data,
                                const ProgressFn& progress = {});

struct ScaleRow {
  double source_lambda = 0.0;
  double target = 0.0;
  double factor = 0.0;
  double linf_raw = 0.0;
  PerturbationEval scaled;
  PerturbationEval edge;  // random-edge at the target amplitude
};

struct ScaleReport {
  std::vector<ScaleRow> rows;
  std::string csv() const;
  std::string json(const ExperimentSpec& spec) const;
};

ScaleReport run_scaling_experiment(const ExperimentSpec& spec, const ExperimentData& data,
                                   const ProgressFn& progress = {});

struct EndToEndReport {
  std::vector<ClipMetrics> clips;    // perturbed stream vs clean stream
  std::vector<ClipMetrics> control;  // clean stream vs itself
  std::vector<std::string> command_logs;
  MetricStats wer, recall, ndcg, snr_db;

  std::string clips_csv() const;
  std::string speakers_csv() const;  // speaker,metric,mean,std
  std::string length_csv(std::size_t window) const;
  std::string json(const ExperimentSpec& spec) const;
};

// Streams every eval clip through the injector in chunks and evaluates what
// the endpoint would transcribe.
EndToEndReport run_end_to_end(const ExperimentSpec& spec, const ExperimentData& data, const Perturbation& delta);

// Trailing moving average; the first window-1 points average what exists.
std::vector<double> moving_average(const std::vector<double>& values, std::size_t window);

// Writes text atomically enough for reports: to a temp file, then renamed.
void write_report(const std::filesystem::path& path, const std::string& text);

}  // namespace uapkit
