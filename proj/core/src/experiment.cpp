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

#include "uapkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/perturbation_io.hpp"
#include "uapkit/stream.hpp"

namespace uapkit {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", v);
}

std::string lambda_label(double v) { return fmt::format("{:g}", v); }

// JSON has no infinities; they are written as strings.
Json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + lambda_label(v[i]);
  return out;
}

void check_ascending(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + " must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw ConfigError(std::string(what) + " values must be positive");
    if (i > 0 && !(v[i] > v[i - 1])) throw ConfigError(std::string(what) + " values must be strictly ascending");
  }
}

void require(const ExperimentData& data) {
  if (data.model == nullptr || data.topics == nullptr) throw ArgumentError("experiment: model and topics required");
  if (data.eval.empty()) throw ArgumentError("experiment: empty eval corpus");
}

void fill_stats(PerturbationEval& e) {
  std::vector<double> w, r, n, s;
  for (const auto& c : e.clips) {
    w.push_back(c.wer);
    r.push_back(c.recall);
    n.push_back(c.ndcg);
    s.push_back(c.snr_db);
  }
  e.wer = summarize(w);
  e.recall = summarize(r);
  e.ndcg = summarize(n);
  e.snr_db = summarize(s);
}

ClipMetrics score_clip(const ExperimentData& data, const CleanReference& clean, std::size_t i,
                       const AudioClip& perturbed, std::size_t top_k) {
  const CorpusEntry& entry = data.eval[i];
  ClipMetrics m;
  m.index = i;
  m.clip = entry.wav_path.stem().string();
  m.speaker = entry.speaker_id;
  m.seconds = static_cast<double>(entry.clip.samples.size()) / entry.clip.sample_rate;
  const Transcript hyp = transcribe(*data.model, perturbed);
  m.wer = clean.transcripts[i].words.empty() ? static_cast<double>(hyp.words.size() > 0)
                                             : wer(clean.transcripts[i], hyp);
  const TopicList topics = detect(*data.topics, hyp, top_k);
  const RecallScore rs = recall_at_k(clean.topics[i], topics, top_k);
  m.recall = rs.value;
  m.empty_clean_topics = rs.empty_reference;
  m.ndcg = clean.topics[i].empty() && topics.empty() ? 1.0 : ndcg_at_k(clean.topics[i], topics, top_k);
  std::vector<double> diff(perturbed.samples.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = perturbed.samples[j] - entry.clip.samples[j];
  m.snr_db = snr_db(entry.clip, AudioClip(std::move(diff), entry.clip.sample_rate));
  return m;
}

// Identity of the inputs a crafted UAP depends on: craft settings, model
// weights and crafting clips.
std::string uap_cache_key(const CraftConfig& cfg, const ExperimentData& data) {
  std::string key = cfg.canonical();
  auto add = [&](const auto& m) {
    key.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
  };
  add(data.model->w1);
  add(data.model->w2);
  add(data.model->w3);
  add(data.model->b3);
  add(data.model->feature_mean);
  for (const auto& c : data.craft_clips) {
    key += std::to_string(c.samples.size());
    key.append(reinterpret_cast<const char*>(c.samples.data()), c.samples.size() * sizeof(double));
  }
  return fnv1a_hex(key);
}

Json stats_json(const PerturbationEval& e) {
  Json j;
  j["wer"] = {{"mean", jnum(e.wer.mean)}, {"std", jnum(e.wer.std)}};
  j["recall@k"] = {{"mean", jnum(e.recall.mean)}, {"std", jnum(e.recall.std)}};
  j["ndcg@k"] = {{"mean", jnum(e.ndcg.mean)}, {"std", jnum(e.ndcg.std)}};
  j["snr_db"] = {{"mean", jnum(e.snr_db.mean)}, {"std", jnum(e.snr_db.std)}};
  std::size_t flagged = 0;
  for (const auto& c : e.clips) flagged += c.empty_clean_topics;
  j["empty_clean_topic_lists"] = flagged;
  return j;
}

void metric_rows(std::string& out, const std::string& prefix, const PerturbationEval& e) {
  out += prefix + "wer," + num(e.wer.mean) + "," + num(e.wer.std) + "\n";
  out += prefix + "recall@10," + num(e.recall.mean) + "," + num(e.recall.std) + "\n";
  out += prefix + "ndcg@10," + num(e.ndcg.mean) + "," + num(e.ndcg.std) + "\n";
  out += prefix + "snr_db," + num(e.snr_db.mean) + "," + num(e.snr_db.std) + "\n";
}

std::string clip_line(const ClipMetrics& c) {
  return fmt::format("{},{},{},{},{},{},{},{}", c.index, c.clip, c.speaker, num(c.seconds), num(c.wer),
                     num(c.recall), num(c.ndcg), num(c.snr_db));
}

}  // namespace

void ExperimentSpec::validate() const {
  CraftConfig c = craft;
  c.lambda_raw = lambdas.empty() ? 1.0 : lambdas.front();
  c.validate();
  check_ascending(lambdas, "sweep.lambdas");
  check_ascending(scale_sources, "scale.sources");
  check_ascending(scale_targets, "scale.targets");
  if (top_k == 0) throw ConfigError("top_k must be positive");
  if (!(e2e_lambda > 0.0)) throw ConfigError("e2e.lambda must be positive");
  if (e2e_chunk_samples == 0) throw ConfigError("e2e.chunk_samples must be positive");
  if (!(e2e_amplitude >= 0.0)) throw ConfigError("e2e.amplitude must be nonnegative");
  if (e2e_vad && !(e2e_vad_threshold > 0.0)) throw ConfigError("e2e.vad_threshold must be positive");
  if (smoothing_window == 0) throw ConfigError("e2e.smoothing_window must be positive");
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& cfg) {
  static const std::vector<std::string> known = {
      "seed", "out_dir", "craft.l_seconds", "craft.k", "craft.c", "craft.alpha_init", "craft.epochs",
      "craft.batch_size", "craft.patience", "craft.optimizer", "sweep.lambdas", "scale.sources", "scale.targets",
      "baselines", "baseline_seed", "top_k", "reuse_uaps", "e2e.lambda", "e2e.chunk_samples", "e2e.amplitude",
      "e2e.vad", "e2e.vad_threshold", "e2e.smoothing_window"};
  for (const auto& [key, value] : cfg.values()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      // Keys owned by other subcommands share the file; only experiment keys are checked here.
      if (key.rfind("craft.", 0) == 0 || key.rfind("sweep.", 0) == 0 || key.rfind("scale.", 0) == 0 ||
          key.rfind("e2e.", 0) == 0) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }
  ExperimentSpec s;
  s.craft.seed = cfg.get_u64("seed", s.craft.seed);
  s.craft.l_seconds = cfg.get_double("craft.l_seconds", s.craft.l_seconds);
  s.craft.k = cfg.get_int("craft.k", s.craft.k);
  s.craft.c = cfg.get_double("craft.c", s.craft.c);
  s.craft.alpha_init = cfg.get_double("craft.alpha_init", s.craft.alpha_init);
  s.craft.epochs = cfg.get_int("craft.epochs", s.craft.epochs);
  s.craft.batch_size = cfg.get_int("craft.batch_size", s.craft.batch_size);
  s.craft.patience = cfg.get_int("craft.patience", s.craft.patience);
  const std::string opt = cfg.get_string("craft.optimizer", "sign");
  if (opt == "sign") {
    s.craft.optimizer = CraftOptimizer::kSign;
  } else if (opt == "adam") {
    s.craft.optimizer = CraftOptimizer::kAdam;
  } else {
    throw ConfigError("craft.optimizer must be 'sign' or 'adam'");
  }
  s.lambdas = cfg.get_doubles("sweep.lambdas", s.lambdas);
  s.scale_sources = cfg.get_doubles("scale.sources", s.scale_sources);
  s.scale_targets = cfg.get_doubles("scale.targets", s.scale_targets);
  s.baselines = cfg.get_bool("baselines", s.baselines);
  s.baseline_seed = cfg.get_u64("baseline_seed", s.baseline_seed);
  s.top_k = static_cast<std::size_t>(cfg.get_int("top_k", static_cast<int>(s.top_k)));
  s.reuse_uaps = cfg.get_bool("reuse_uaps", s.reuse_uaps);
  s.e2e_lambda = cfg.get_double("e2e.lambda", s.e2e_lambda);
  const int chunk = cfg.get_int("e2e.chunk_samples", static_cast<int>(s.e2e_chunk_samples));
  if (chunk <= 0) throw ConfigError("e2e.chunk_samples must be positive");
  s.e2e_chunk_samples = static_cast<std::size_t>(chunk);
  s.e2e_amplitude = cfg.get_double("e2e.amplitude", s.e2e_amplitude);
  s.e2e_vad = cfg.get_bool("e2e.vad", s.e2e_vad);
  s.e2e_vad_threshold = cfg.get_double("e2e.vad_threshold", s.e2e_vad_threshold);
  const int window = cfg.get_int("e2e.smoothing_window", static_cast<int>(s.smoothing_window));
  if (window <= 0) throw ConfigError("e2e.smoothing_window must be positive");
  s.smoothing_window = static_cast<std::size_t>(window);
  s.out_dir = cfg.get_string("out_dir", s.out_dir.string());
  s.validate();
  return s;
}

std::string ExperimentSpec::to_config_text() const {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("seed", std::to_string(craft.seed));
  kv("craft.l_seconds", num(craft.l_seconds));
  kv("craft.k", std::to_string(craft.k));
  kv("craft.c", num(craft.c));
  kv("craft.alpha_init", num(craft.alpha_init));
  kv("craft.epochs", std::to_string(craft.epochs));
  kv("craft.batch_size", std::to_string(craft.batch_size));
  kv("craft.patience", std::to_string(craft.patience));
  kv("craft.optimizer", craft.optimizer == CraftOptimizer::kSign ? "sign" : "adam");
  kv("sweep.lambdas", join(lambdas));
  kv("scale.sources", join(scale_sources));
  kv("scale.targets", join(scale_targets));
  kv("baselines", baselines ? "true" : "false");
  kv("baseline_seed", std::to_string(baseline_seed));
  kv("top_k", std::to_string(top_k));
  kv("reuse_uaps", reuse_uaps ? "true" : "false");
  kv("e2e.lambda", num(e2e_lambda));
  kv("e2e.chunk_samples", std::to_string(e2e_chunk_samples));
  kv("e2e.amplitude", num(e2e_amplitude));
  kv("e2e.vad", e2e_vad ? "true" : "false");
  kv("e2e.vad_threshold", num(e2e_vad_threshold));
  kv("e2e.smoothing_window", std::to_string(smoothing_window));
  kv("out_dir", out_dir.string());
  return out;
}

MetricStats summarize(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1 && std::isfinite(s.mean)) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  } else if (!std::isfinite(s.mean)) {
    s.std = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

CleanReference clean_reference(const ExperimentData& data, std::size_t top_k) {
  require(data);
  CleanReference ref;
  ref.transcripts.resize(data.eval.size());
  ref.topics.resize(data.eval.size());
  detail::parallel_for(data.eval.size(), [&](std::size_t i) {
    ref.transcripts[i] = transcribe(*data.model, data.eval[i].clip);
    ref.topics[i] = detect(*data.topics, ref.transcripts[i], top_k);
  });
  return ref;
}

PerturbationEval evaluate_perturbation(const ExperimentData& data, const CleanReference& clean,
                                       const Perturbation& delta, double factor, std::size_t top_k) {
  require(data);
  if (!(factor >= 0.0)) throw ArgumentError("evaluate_perturbation: factor must be nonnegative");
  PerturbationEval out;
  out.lambda = delta.lambda_raw * factor;
  out.clips.resize(data.eval.size());
  const AudioClip scaled = factor == 1.0 ? delta.clip : scale(delta.clip, factor);
  detail::parallel_for(data.eval.size(), [&](std::size_t i) {
    const AudioClip& clip = data.eval[i].clip;
    const AudioClip perturbed = mix(clip, tile_to_length(scaled, clip.samples.size()));
    out.clips[i] = score_clip(data, clean, i, perturbed, top_k);
  });
  fill_stats(out);
  return out;
}

std::filesystem::path uap_path(const std::filesystem::path& dir, double lambda) {
  return dir / ("uap_" + lambda_label(lambda) + ".wav");
}

Perturbation obtain_uap(const ExperimentSpec& spec, const ExperimentData& data, double lambda,
                        const ProgressFn& progress) {
  require(data);
  CraftConfig cfg = spec.craft;
  cfg.lambda_raw = lambda;
  cfg.validate();
  const std::string key = uap_cache_key(cfg, data);
  const auto path = uap_path(spec.out_dir, lambda);
  if (spec.reuse_uaps && std::filesystem::exists(path) && std::filesystem::exists(sidecar_path(path))) {
    PerturbationMeta meta;
    try {
      Perturbation cached = load_perturbation(path, &meta);
      if (meta.config_hash == key && meta.kind == "crafted") {
        if (progress) progress("reusing " + path.string());
        return cached;
      }
    } catch (const Error&) {
      // A damaged cache entry is rebuilt below.
    }
  }
  if (data.craft_clips.empty()) throw ArgumentError("obtain_uap: no crafting clips");
  if (progress) progress(fmt::format("crafting lambda={} ({} epochs)", lambda_label(lambda), cfg.epochs));
  const auto samples = prepare_craft_samples(*data.model, data.craft_clips, cfg);
  CraftOutcome outcome = craft(*data.model, samples, cfg);
  // The device plays 16-bit samples; evaluating the quantized buffer keeps
  // cached and freshly crafted runs identical.
  Perturbation delta = outcome.delta;
  for (double& v : delta.clip.samples) v = dequantize_sample(quantize_sample(v));
  std::filesystem::create_directories(spec.out_dir);
  save_perturbation(delta, {lambda, cfg.l_seconds, cfg.sample_rate, key, "crafted"}, path);
  write_report(spec.out_dir / ("craft_" + lambda_label(lambda) + ".csv"), outcome.report.csv());
  write_report(spec.out_dir / ("craft_" + lambda_label(lambda) + ".json"), outcome.report.json_summary(cfg));
  return delta;
}

std::string SweepReport::csv() const {
  std::string out = "lambda,kind,metric,mean,std\n";
  for (const auto& r : rows) metric_rows(out, lambda_label(r.lambda) + "," + r.kind + ",", r);
  return out;
}

std::string SweepReport::clips_csv() const {
  std::string out = "lambda,kind,index,clip,speaker,seconds,wer,recall@10,ndcg@10,snr_db\n";
  for (const auto& r : rows) {
    for (const auto& c : r.clips) out += lambda_label(r.lambda) + "," + r.kind + "," + clip_line(c) + "\n";
  }
  return out;
}

std::string SweepReport::json(const ExperimentSpec& spec) const {
  Json j;
  j["experiment"] = "amplitude-sweep";
  j["config"] = spec.to_config_text();
  j["eval_clips"] = control.clips.size();
  j["control"] = stats_json(control);
  Json points = Json::array();
  for (const auto& r : rows) {
    Json p = stats_json(r);
    p["lambda"] = r.lambda;
    p["kind"] = r.kind;
    points.push_back(p);
  }
  j["points"] = points;
  return j.dump(2) + "\n";
}

const PerturbationEval* SweepReport::find(double lambda, const std::string& kind) const {
  for (const auto& r : rows) {
    if (r.lambda == lambda && r.kind == kind) return &r;
  }
  return nullptr;
}

SweepReport run_amplitude_sweep(const ExperimentSpec& spec, const ExperimentData& data, const ProgressFn& progress) {
  spec.validate();
  require(data);
  const CleanReference clean = clean_reference(data, spec.top_k);
  SweepReport report;
  {
    const Perturbation zero{AudioClip(std::vector<double>(spec.craft.delta_samples(), 0.0), spec.craft.sample_rate),
                            spec.lambdas.front()};
    report.control = evaluate_perturbation(data, clean, zero, 0.0, spec.top_k);
    report.control.kind = "control";
    report.control.lambda = 0.0;
  }
  for (double lambda : spec.lambdas) {
    const Perturbation delta = obtain_uap(spec, data, lambda, progress);
    PerturbationEval e = evaluate_perturbation(data, clean, delta, 1.0, spec.top_k);
    e.kind = "crafted";
    report.rows.push_back(std::move(e));
    if (spec.baselines) {
      const std::uint64_t seed = spec.baseline_seed;
      PerturbationEval ri = evaluate_perturbation(
          data, clean, random_integer_perturbation(lambda, spec.craft.l_seconds, seed, spec.craft.sample_rate), 1.0,
          spec.top_k);
      ri.kind = "random-integer";
      report.rows.push_back(std::move(ri));
      PerturbationEval re = evaluate_perturbation(
          data, clean, random_edge_perturbation(lambda, spec.craft.l_seconds, seed, spec.craft.sample_rate), 1.0,
          spec.top_k);
      re.kind = "random-edge";
      report.rows.push_back(std::move(re));
    }
    if (progress) progress(fmt::format("lambda={} evaluated", lambda_label(lambda)));
  }
  return report;
}

std::string ScaleReport::csv() const {
  std::string out =
      "source_lambda,target,factor,linf_raw,wer_mean,wer_std,recall@10_mean,recall@10_std,ndcg@10_mean,"
      "ndcg@10_std,snr_db_mean,snr_db_std,edge_wer_mean,edge_recall@10_mean,edge_ndcg@10_mean\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", lambda_label(r.source_lambda),
                       lambda_label(r.target), num(r.factor), num(r.linf_raw), num(r.scaled.wer.mean),
                       num(r.scaled.wer.std), num(r.scaled.recall.mean), num(r.scaled.recall.std),
                       num(r.scaled.ndcg.mean), num(r.scaled.ndcg.std), num(r.scaled.snr_db.mean),
                       num(r.scaled.snr_db.std), num(r.edge.wer.mean), num(r.edge.recall.mean),
                       num(r.edge.ndcg.mean));
  }
  return out;
}

std::string ScaleReport::json(const ExperimentSpec& spec) const {
  Json j;
  j["experiment"] = "scaling";
  j["config"] = spec.to_config_text();
  Json rs = Json::array();
  for (const auto& r : rows) {
    Json x;
    x["source_lambda"] = r.source_lambda;
    x["target"] = r.target;
    x["factor"] = r.factor;
    x["linf_raw"] = r.linf_raw;
    x["scaled"] = stats_json(r.scaled);
    x["random_edge"] = stats_json(r.edge);
    rs.push_back(x);
  }
  j["rows"] = rs;
  return j.dump(2) + "\n";
}

ScaleReport run_scaling_experiment(const ExperimentSpec& spec, const ExperimentData& data,
                                   const ProgressFn& progress) {
  spec.validate();
  require(data);
  const CleanReference clean = clean_reference(data, spec.top_k);
  ScaleReport report;
  for (double source : spec.scale_sources) {
    const Perturbation delta = obtain_uap(spec, data, source, progress);
    for (double target : spec.scale_targets) {
      ScaleRow row;
      row.source_lambda = source;
      row.target = target;
      row.factor = target / source;
      const Perturbation scaled = scale(delta, row.factor);
      row.linf_raw = norm_to_raw(linf_norm(scaled.clip.samples));
      row.scaled = evaluate_perturbation(data, clean, scaled, 1.0, spec.top_k);
      row.scaled.kind = "scaled";
      row.edge = evaluate_perturbation(
          data, clean, random_edge_perturbation(target, spec.craft.l_seconds, spec.baseline_seed, spec.craft.sample_rate),
          1.0, spec.top_k);
      row.edge.kind = "random-edge";
      report.rows.push_back(std::move(row));
      if (progress) progress(fmt::format("scaled {} -> {}", lambda_label(source), lambda_label(target)));
    }
  }
  return report;
}

EndToEndReport run_end_to_end(const ExperimentSpec& spec, const ExperimentData& data, const Perturbation& delta) {
  spec.validate();
  require(data);
  const std::size_t n = data.eval.size();
  EndToEndReport report;
  report.clips.resize(n);
  report.control.resize(n);
  report.command_logs.resize(n);

  auto stream = [&](const AudioClip& clip, Injector& injector) {
    std::vector<double> out;
    out.reserve(clip.samples.size());
    for (std::size_t b = 0; b < clip.samples.size(); b += spec.e2e_chunk_samples) {
      const std::size_t e = std::min(clip.samples.size(), b + spec.e2e_chunk_samples);
      const AudioClip chunk(std::vector<double>(clip.samples.begin() + static_cast<std::ptrdiff_t>(b),
                                                clip.samples.begin() + static_cast<std::ptrdiff_t>(e)),
                            clip.sample_rate);
      const AudioClip y = injector.process_chunk(chunk);
      out.insert(out.end(), y.samples.begin(), y.samples.end());
    }
    return AudioClip(std::move(out), clip.sample_rate);
  };

  std::vector<Transcript> clean_transcripts(n);
  std::vector<TopicList> clean_topics(n);
  std::vector<AudioClip> perturbed(n);
  detail::parallel_for(n, [&](std::size_t i) {
    const AudioClip& clip = data.eval[i].clip;
    // The clean pass goes through an injector at factor 0, like the device
    // with its output muted.
    Injector silent(delta, 0.0);
    const AudioClip clean = stream(clip, silent);
    clean_transcripts[i] = transcribe(*data.model, clean);
    clean_topics[i] = detect(*data.topics, clean_transcripts[i], spec.top_k);

    Injector injector(delta, 1.0);
    injector.apply(ControlCommand::set_amplitude(spec.e2e_amplitude));
    if (spec.e2e_vad) injector.apply(ControlCommand::set_vad(true, spec.e2e_vad_threshold));
    perturbed[i] = stream(clip, injector);
    report.command_logs[i] = injector.command_log_text();
  });
  const CleanReference clean{clean_transcripts, clean_topics};
  detail::parallel_for(n, [&](std::size_t i) {
    report.clips[i] = score_clip(data, clean, i, perturbed[i], spec.top_k);
    report.control[i] = score_clip(data, clean, i, data.eval[i].clip, spec.top_k);
  });
  PerturbationEval agg;
  agg.clips = report.clips;
  fill_stats(agg);
  report.wer = agg.wer;
  report.recall = agg.recall;
  report.ndcg = agg.ndcg;
  report.snr_db = agg.snr_db;
  return report;
}

std::string EndToEndReport::clips_csv() const {
  std::string out = "index,clip,speaker,seconds,wer,recall@10,ndcg@10,snr_db,control_recall@10,control_ndcg@10\n";
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out += clip_line(clips[i]) + "," + num(control[i].recall) + "," + num(control[i].ndcg) + "\n";
  }
  return out;
}

std::string EndToEndReport::speakers_csv() const {
  std::map<std::string, PerturbationEval> by;
  for (const auto& c : clips) by[c.speaker].clips.push_back(c);
  std::string out = "speaker,metric,mean,std\n";
  for (auto& [speaker, e] : by) {
    fill_stats(e);
    metric_rows(out, speaker + ",", e);
  }
  PerturbationEval all;
  all.clips = clips;
  fill_stats(all);
  metric_rows(out, "all,", all);
  return out;
}

std::string EndToEndReport::length_csv(std::size_t window) const {
  std::vector<std::size_t> order(clips.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return clips[a].seconds < clips[b].seconds; });
  std::vector<double> w, r, n, s;
  for (std::size_t i : order) {
    w.push_back(clips[i].wer);
    r.push_back(clips[i].recall);
    n.push_back(clips[i].ndcg);
    s.push_back(clips[i].snr_db);
  }
  const auto ws = moving_average(w, window);
  const auto rs = moving_average(r, window);
  const auto ns = moving_average(n, window);
  const auto ss = moving_average(s, window);
  std::string out = "seconds,index,wer,recall@10,ndcg@10,snr_db,wer_smooth,recall@10_smooth,ndcg@10_smooth,snr_db_smooth\n";
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& c = clips[order[j]];
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", num(c.seconds), c.index, num(c.wer), num(c.recall),
                       num(c.ndcg), num(c.snr_db), num(ws[j]), num(rs[j]), num(ns[j]), num(ss[j]));
  }
  return out;
}

std::string EndToEndReport::json(const ExperimentSpec& spec) const {
  Json j;
  j["experiment"] = "end-to-end";
  j["config"] = spec.to_config_text();
  j["clips"] = clips.size();
  j["mean"] = {{"wer", jnum(wer.mean)}, {"recall@k", jnum(recall.mean)}, {"ndcg@k", jnum(ndcg.mean)},
               {"snr_db", jnum(snr_db.mean)}};
  j["std"] = {{"wer", jnum(wer.std)}, {"recall@k", jnum(recall.std)}, {"ndcg@k", jnum(ndcg.std)},
              {"snr_db", jnum(snr_db.std)}};
  PerturbationEval ctl;
  ctl.clips = control;
  fill_stats(ctl);
  j["control"] = stats_json(ctl);
  return j.dump(2) + "\n";
}

std::vector<double> moving_average(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw ArgumentError("moving_average: window must be positive");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = begin; j <= i; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(i + 1 - begin);
  }
  return out;
}

void write_report(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace uapkit
