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

#include "uapkit/crafter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/metrics.hpp"
#include "uapkit/perturbation_io.hpp"

namespace uapkit {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

AudioClip raw_to_clip(std::span<const double> raw, int rate) {
  std::vector<double> s(raw.begin(), raw.end());
  for (double& v : s) v = raw_to_norm(v);
  return AudioClip(std::move(s), rate);
}

// Near-uniform output on a real clip means the model was never trained.
bool looks_untrained(const SurrogateAsr& model, const AudioClip& clip) {
  const Matrix lp = forward(model, clip);
  const double spread = (lp.rowwise().maxCoeff() - lp.rowwise().minCoeff()).maxCoeff();
  return spread < 1e-3;
}

}  // namespace

std::size_t CraftConfig::delta_samples() const noexcept {
  return static_cast<std::size_t>(std::llround(l_seconds * sample_rate));
}

void CraftConfig::validate() const {
  if (!(l_seconds > 0.0) || delta_samples() == 0) throw ArgumentError("craft: l_seconds must be positive");
  if (k < 1) throw ArgumentError("craft: k must be >= 1");
  if (!(lambda_raw > 0.0)) throw ArgumentError("craft: lambda must be positive");
  if (c < 0.0) throw ArgumentError("craft: c must be nonnegative");
  if (!(alpha_init >= 1.0)) throw ArgumentError("craft: alpha_init must be >= 1");
  if (epochs < 0 || batch_size < 1 || patience < 1) throw ArgumentError("craft: epochs/batch_size/patience invalid");
  if (sample_rate <= 0) throw ArgumentError("craft: sample_rate must be positive");
}

std::string CraftConfig::canonical() const {
  return fmt::format("l_seconds={};k={};lambda_raw={};c={};alpha_init={};epochs={};batch_size={};patience={};"
                     "seed={};sample_rate={};optimizer={}",
                     l_seconds, k, lambda_raw, c, alpha_init, epochs, batch_size, patience, seed, sample_rate,
                     optimizer == CraftOptimizer::kSign ? "sign" : "adam");
}

std::string CraftConfig::hash() const { return fnv1a_hex(canonical()); }

std::vector<CraftSample> prepare_craft_samples(const SurrogateAsr& model, std::span<const AudioClip> clips,
                                               const CraftConfig& cfg) {
  cfg.validate();
  std::vector<CraftSample> out(clips.size());
  const std::size_t n = cfg.crop_samples();
  detail::parallel_for(clips.size(), [&](std::size_t i) {
    const AudioClip& src = clips[i];
    if (src.sample_rate != cfg.sample_rate) throw ArgumentError("craft: clip sample rate mismatch");
    if (src.size() < n) {
      throw ArgumentError(fmt::format("craft: clip {} is {:.2f} s, needs {:.2f} s", i, src.seconds(),
                                      cfg.crop_seconds()));
    }
    CraftSample s;
    s.clip = AudioClip(std::vector<double>(src.samples.begin(), src.samples.begin() + static_cast<std::ptrdiff_t>(n)),
                       src.sample_rate);
    s.reference_text = normalize_text(greedy_decode_text(forward(model, s.clip)));
    for (char ch : s.reference_text) s.reference.push_back(Alphabet::index_of(ch));
    out[i] = std::move(s);
  });
  return out;
}

ObjectiveResult objective(const SurrogateAsr& model, std::span<const CraftSample> batch,
                          std::span<const double> delta_raw, double c, int k) {
  if (k < 1) throw ArgumentError("objective: k must be >= 1");
  const std::size_t len = delta_raw.size();
  if (len == 0) throw ArgumentError("objective: empty perturbation");
  const int rate = batch.empty() ? kDefaultSampleRate : batch.front().clip.sample_rate;
  const AudioClip tiled = tile(raw_to_clip(delta_raw, rate), static_cast<std::size_t>(k));

  struct Part {
    bool used = false;
    double loss = 0.0;
    std::vector<double> folded;
  };
  std::vector<Part> parts(batch.size());
  detail::parallel_for(batch.size(), [&](std::size_t i) {
    const CraftSample& s = batch[i];
    if (s.reference.empty()) return;
    if (s.clip.size() != tiled.size()) {
      throw ArgumentError(fmt::format("objective: clip length {} != l*k length {}", s.clip.size(), tiled.size()));
    }
    const AudioClip perturbed = mix(s.clip, tiled);
    const InputGradient g = input_gradient(model, perturbed, s.reference);
    if (!g.valid) return;
    Part& p = parts[i];
    p.used = true;
    p.loss = g.loss;
    p.folded.assign(len, 0.0);
    for (std::size_t n = 0; n < g.grad.size(); ++n) {
      // Samples saturated by the mix clamp do not respond to delta.
      const double sum = s.clip.samples[n] + tiled.samples[n];
      if (sum > -1.0 && sum < 1.0) p.folded[n % len] += g.grad[n];
    }
  });

  ObjectiveResult r;
  r.grad.assign(len, 0.0);
  double loss_sum = 0.0;
  for (const Part& p : parts) {
    if (!p.used) {
      ++r.skipped;
      continue;
    }
    ++r.used;
    loss_sum += p.loss;
    for (std::size_t j = 0; j < len; ++j) r.grad[j] += p.folded[j];
  }
  const double norm = l2_norm(delta_raw);
  r.ctc_term = r.used > 0 ? loss_sum / static_cast<double>(r.used) : 0.0;
  r.value = -r.ctc_term + c * norm;
  // d/d delta_raw of -mean CTC: the waveform gradient is per normalized unit.
  const double scale = r.used > 0 ? -1.0 / (static_cast<double>(r.used) * kRawScale) : 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    r.grad[j] *= scale;
    if (norm > 0.0) r.grad[j] += c * delta_raw[j] / norm;
  }
  return r;
}

double probe_wer(const SurrogateAsr& model, std::span<const CraftSample> probe, const AudioClip& delta) {
  std::vector<double> wers(probe.size(), std::numeric_limits<double>::quiet_NaN());
  detail::parallel_for(probe.size(), [&](std::size_t i) {
    const CraftSample& s = probe[i];
    if (s.reference_text.empty()) return;
    const AudioClip noisy = mix(s.clip, tile_to_length(delta, s.clip.size()));
    wers[i] = wer(Transcript::from_text(s.reference_text), transcribe(model, noisy));
  });
  double acc = 0.0;
  std::size_t n = 0;
  for (double w : wers) {
    if (std::isnan(w)) continue;
    acc += w;
    ++n;
  }
  return n > 0 ? acc / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

CraftOutcome craft(const SurrogateAsr& model, std::span<const CraftSample> corpus, const CraftConfig& cfg,
                   std::span<const CraftSample> probe) {
  cfg.validate();
  if (corpus.empty()) throw ArgumentError("craft: empty corpus");
  for (const auto& s : corpus) {
    if (s.clip.size() != cfg.crop_samples()) throw ArgumentError("craft: corpus clip is not l*k long");
  }

  const std::size_t len = cfg.delta_samples();
  std::vector<double> delta(len, 0.0);
  CraftOutcome out;
  out.report.config_hash = cfg.hash();
  out.report.untrained_warning = looks_untrained(model, corpus.front().clip);
  for (const auto& s : corpus) out.report.skipped_clips += s.reference.empty() ? 1 : 0;

  double alpha = cfg.alpha_init;
  double best = std::numeric_limits<double>::infinity();
  int stall = 0;
  std::vector<double> adam_m(len, 0.0);
  std::vector<double> adam_v(len, 0.0);
  long adam_step = 0;
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  std::vector<std::size_t> order(corpus.size());
  std::vector<CraftSample> batch;
  const auto bsize = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double obj_sum = 0.0;
    double ctc_sum = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += bsize) {
      batch.clear();
      for (std::size_t i = begin; i < std::min(order.size(), begin + bsize); ++i) batch.push_back(corpus[order[i]]);
      const ObjectiveResult r = objective(model, batch, delta, cfg.c, cfg.k);
      obj_sum += r.value;
      ctc_sum += r.ctc_term;
      ++batches;

      // Descend the objective, i.e. ascend the CTC term.
      if (cfg.optimizer == CraftOptimizer::kSign) {
        for (std::size_t j = 0; j < len; ++j) delta[j] -= alpha * sign(r.grad[j]);
      } else {
        ++adam_step;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_step));
        for (std::size_t j = 0; j < len; ++j) {
          adam_m[j] = kBeta1 * adam_m[j] + (1.0 - kBeta1) * r.grad[j];
          adam_v[j] = kBeta2 * adam_v[j] + (1.0 - kBeta2) * r.grad[j] * r.grad[j];
          delta[j] -= alpha * (adam_m[j] / c1) / (std::sqrt(adam_v[j] / c2) + kEps);
        }
      }

      if (r.value < best) {
        best = r.value;
        stall = 0;
      } else if (++stall >= cfg.patience) {
        if (alpha > 1.0) ++out.report.alpha_decays;
        alpha = std::max(1.0, alpha - 1.0);
        stall = 0;
      }
    }

    for (double& v : delta) v = std::clamp(v, -cfg.lambda_raw, cfg.lambda_raw);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.objective = obj_sum / batches;
    rec.ctc_term = ctc_sum / batches;
    rec.l2_norm = l2_norm(delta);
    rec.linf = linf_norm(delta);
    rec.alpha = alpha;
    rec.probe_wer = probe.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : probe_wer(model, probe, raw_to_clip(delta, cfg.sample_rate));
    out.report.epochs.push_back(rec);
  }

  out.delta.clip = raw_to_clip(delta, cfg.sample_rate);
  out.delta.lambda_raw = cfg.lambda_raw;
  return out;
}

std::string CraftReport::csv() const {
  std::string out = "epoch,objective,ctc_term,l2_norm,alpha,probe_wer\n";
  for (const auto& e : epochs) {
    out += fmt::format("{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", e.epoch, e.objective, e.ctc_term, e.l2_norm,
                       e.alpha, e.probe_wer);
  }
  return out;
}

std::string CraftReport::json_summary(const CraftConfig& cfg) const {
  nlohmann::ordered_json j;
  j["config"] = {{"l_seconds", cfg.l_seconds},   {"k", cfg.k},
                 {"lambda_raw", cfg.lambda_raw}, {"c", cfg.c},
                 {"alpha_init", cfg.alpha_init}, {"epochs", cfg.epochs},
                 {"batch_size", cfg.batch_size}, {"patience", cfg.patience},
                 {"seed", cfg.seed},             {"optimizer", cfg.optimizer == CraftOptimizer::kSign ? "sign" : "adam"}};
  j["config_hash"] = config_hash;
  j["epochs_run"] = epochs.size();
  j["skipped_clips"] = skipped_clips;
  j["alpha_decays"] = alpha_decays;
  j["untrained_warning"] = untrained_warning;
  if (!epochs.empty()) {
    const auto& last = epochs.back();
    j["final"] = {{"objective", last.objective}, {"ctc_term", last.ctc_term}, {"l2_norm", last.l2_norm},
                  {"linf_raw", last.linf},       {"alpha", last.alpha}};
    if (!std::isnan(last.probe_wer)) j["final"]["probe_wer"] = last.probe_wer;
  }
  return j.dump(2) + "\n";
}

Perturbation random_integer_perturbation(double lambda_raw, double l_seconds, std::uint64_t seed, int sample_rate) {
  if (!(lambda_raw >= 1.0)) throw ArgumentError("random_integer_perturbation: lambda must be >= 1");
  const auto n = static_cast<std::size_t>(std::llround(l_seconds * sample_rate));
  const auto bound = static_cast<int>(std::floor(lambda_raw));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-bound, bound);
  std::vector<double> s(n);
  for (double& v : s) v = raw_to_norm(dist(rng));
  return Perturbation{AudioClip(std::move(s), sample_rate), lambda_raw};
}

Perturbation random_edge_perturbation(double lambda_raw, double l_seconds, std::uint64_t seed, int sample_rate) {
  if (!(lambda_raw >= 1.0)) throw ArgumentError("random_edge_perturbation: lambda must be >= 1");
  const auto n = static_cast<std::size_t>(std::llround(l_seconds * sample_rate));
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> s(n);
  for (double& v : s) v = raw_to_norm(coin(rng) ? lambda_raw : -lambda_raw);
  return Perturbation{AudioClip(std::move(s), sample_rate), lambda_raw};
}

}  // namespace uapkit
