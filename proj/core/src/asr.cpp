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

#include "uapkit/asr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "parallel.hpp"
#include "uapkit/errors.hpp"
#include "uapkit/metrics.hpp"

namespace uapkit {

namespace {

void he_uniform(Matrix& w, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
}

Matrix clipped_relu(const Matrix& x, double cap) {
  return x.unaryExpr([cap](double v) { return std::clamp(v, 0.0, cap); });
}

// Zero the gradient where the clipped ReLU was flat.
void clipped_relu_backward(Matrix& grad, const Matrix& pre, double cap) {
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double v = pre.data()[i];
    if (!(v > 0.0 && v < cap)) grad.data()[i] = 0.0;
  }
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double hi = logits.row(t).maxCoeff();
    const double lse = hi + std::log((logits.row(t).array() - hi).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

Matrix stack_frames(const Matrix& normed, int context) {
  const Eigen::Index frames = normed.rows();
  const Eigen::Index coeffs = normed.cols();
  const int width = 2 * context + 1;
  Matrix stacked(frames, width * coeffs);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + j - context, 0, frames - 1);
      stacked.block(t, j * coeffs, 1, coeffs) = normed.row(src);
    }
  }
  return stacked;
}

Matrix unstack_frames(const Matrix& d_stacked, Eigen::Index coeffs, int context) {
  const Eigen::Index frames = d_stacked.rows();
  const int width = 2 * context + 1;
  Matrix d(frames, coeffs);
  d.setZero();
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = 0; j < width; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + j - context, 0, frames - 1);
      d.row(src) += d_stacked.block(t, j * coeffs, 1, coeffs);
    }
  }
  return d;
}

}  // namespace

void AsrConfig::validate() const {
  mfcc.validate();
  if (context < 0) throw ArgumentError("AsrConfig: context must be >= 0");
  if (hidden1 <= 0 || hidden2 <= 0) throw ArgumentError("AsrConfig: hidden sizes must be positive");
  if (!(relu_cap > 0.0)) throw ArgumentError("AsrConfig: relu_cap must be positive");
}

SurrogateAsr::SurrogateAsr(const AsrConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  w1.resize(cfg_.hidden1, cfg_.input_dim());
  w2.resize(cfg_.hidden2, cfg_.hidden1);
  w3.resize(Alphabet::kSize, cfg_.hidden2);
  he_uniform(w1, rng);
  he_uniform(w2, rng);
  he_uniform(w3, rng);
  b1 = RowVector::Zero(cfg_.hidden1);
  b2 = RowVector::Zero(cfg_.hidden2);
  b3 = RowVector::Zero(Alphabet::kSize);
  feature_mean = RowVector::Zero(cfg_.mfcc.cepstral_coeffs);
  feature_std = RowVector::Ones(cfg_.mfcc.cepstral_coeffs);
}

std::size_t SurrogateAsr::parameter_count() const noexcept {
  return static_cast<std::size_t>(w1.size() + w2.size() + w3.size() + b1.size() + b2.size() + b3.size());
}

bool SurrogateAsr::operator==(const SurrogateAsr& o) const {
  return cfg_ == o.cfg_ && w1 == o.w1 && w2 == o.w2 && w3 == o.w3 && b1 == o.b1 && b2 == o.b2 &&
         b3 == o.b3 && feature_mean == o.feature_mean && feature_std == o.feature_std;
}

Matrix forward_features(const SurrogateAsr& model, const Matrix& features, AsrForwardContext* ctx) {
  const AsrConfig& cfg = model.config();
  if (features.rows() == 0) throw ArgumentError("forward: no feature frames");
  if (features.cols() != cfg.mfcc.cepstral_coeffs) throw ArgumentError("forward: feature width mismatch");
  Matrix normed = (features.rowwise() - model.feature_mean).array().rowwise() / model.feature_std.array();
  Matrix stacked = stack_frames(normed, cfg.context);
  Matrix pre1 = (stacked * model.w1.transpose()).rowwise() + model.b1;
  Matrix act1 = clipped_relu(pre1, cfg.relu_cap);
  Matrix pre2 = (act1 * model.w2.transpose()).rowwise() + model.b2;
  Matrix act2 = clipped_relu(pre2, cfg.relu_cap);
  const Matrix logits = (act2 * model.w3.transpose()).rowwise() + model.b3;
  Matrix logprobs = log_softmax_rows(logits);
  if (ctx != nullptr) {
    ctx->stacked = std::move(stacked);
    ctx->pre1 = std::move(pre1);
    ctx->pre2 = std::move(pre2);
    ctx->act1 = std::move(act1);
    ctx->act2 = std::move(act2);
    ctx->logprobs = logprobs;
  }
  return logprobs;
}

Matrix forward(const SurrogateAsr& model, const AudioClip& clip, AsrForwardContext* ctx) {
  const FeatureMatrix feats = mfcc_forward(clip, model.config().mfcc, ctx != nullptr ? &ctx->mfcc : nullptr);
  return forward_features(model, feats.frames, ctx);
}

AsrGradients AsrGradients::zeros_like(const SurrogateAsr& m) {
  AsrGradients g;
  g.w1 = Matrix::Zero(m.w1.rows(), m.w1.cols());
  g.w2 = Matrix::Zero(m.w2.rows(), m.w2.cols());
  g.w3 = Matrix::Zero(m.w3.rows(), m.w3.cols());
  g.b1 = RowVector::Zero(m.b1.size());
  g.b2 = RowVector::Zero(m.b2.size());
  g.b3 = RowVector::Zero(m.b3.size());
  return g;
}

AsrGradients& AsrGradients::operator+=(const AsrGradients& o) {
  w1 += o.w1;
  w2 += o.w2;
  w3 += o.w3;
  b1 += o.b1;
  b2 += o.b2;
  b3 += o.b3;
  return *this;
}

AsrGradients& AsrGradients::operator*=(double s) {
  w1 *= s;
  w2 *= s;
  w3 *= s;
  b1 *= s;
  b2 *= s;
  b3 *= s;
  return *this;
}

Matrix log_softmax_backward(const Matrix& logprobs, const Matrix& d_logprobs) {
  const Matrix probs = logprobs.array().exp().matrix();
  const Eigen::VectorXd row_sums = d_logprobs.rowwise().sum();
  return d_logprobs - (probs.array().colwise() * row_sums.array()).matrix();
}

Matrix backward_network(const SurrogateAsr& model, const AsrForwardContext& ctx, const Matrix& d_logprobs,
                        AsrGradients* params) {
  const AsrConfig& cfg = model.config();
  if (d_logprobs.rows() != ctx.logprobs.rows() || d_logprobs.cols() != ctx.logprobs.cols()) {
    throw ArgumentError("backward_network: gradient shape does not match the forward pass");
  }
  const Matrix d_logits = log_softmax_backward(ctx.logprobs, d_logprobs);
  Matrix d_act2 = d_logits * model.w3;
  clipped_relu_backward(d_act2, ctx.pre2, cfg.relu_cap);
  Matrix d_act1 = d_act2 * model.w2;
  clipped_relu_backward(d_act1, ctx.pre1, cfg.relu_cap);
  const Matrix d_stacked = d_act1 * model.w1;
  if (params != nullptr) {
    params->w3.noalias() += d_logits.transpose() * ctx.act2;
    params->b3 += d_logits.colwise().sum();
    params->w2.noalias() += d_act2.transpose() * ctx.act1;
    params->b2 += d_act2.colwise().sum();
    params->w1.noalias() += d_act1.transpose() * ctx.stacked;
    params->b1 += d_act1.colwise().sum();
  }
  const Matrix d_normed = unstack_frames(d_stacked, cfg.mfcc.cepstral_coeffs, cfg.context);
  return d_normed.array().rowwise() / model.feature_std.array();
}

InputGradient input_gradient(const SurrogateAsr& model, const AudioClip& clip, std::span<const int> labels) {
  AsrForwardContext ctx;
  InputGradient out;
  out.logprobs = forward(model, clip, &ctx);
  const CtcResult ctc = ctc_loss(out.logprobs, labels, Alphabet::kBlank);
  out.loss = ctc.loss;
  const CtcGradient g = ctc_backward(ctc);
  out.valid = g.valid;
  if (!g.valid) {
    out.grad.assign(clip.size(), 0.0);
    return out;
  }
  const Matrix d_features = backward_network(model, ctx, g.grad, nullptr);
  out.grad = mfcc_backward(d_features, ctx.mfcc);
  return out;
}

InputGradient input_gradient(const SurrogateAsr& model, const AudioClip& clip, const CtcTarget& target) {
  return input_gradient(model, clip, target.labels);
}

std::string greedy_decode_text(const Matrix& logprobs) {
  std::string text;
  int prev = -1;
  for (Eigen::Index t = 0; t < logprobs.rows(); ++t) {
    Eigen::Index best = 0;
    logprobs.row(t).maxCoeff(&best);
    const int idx = static_cast<int>(best);
    if (idx != prev && idx != Alphabet::kBlank) text.push_back(Alphabet::symbol(idx));
    prev = idx;
  }
  return text;
}

Transcript greedy_decode(const Matrix& logprobs) { return Transcript::from_text(greedy_decode_text(logprobs)); }

Transcript transcribe(const SurrogateAsr& model, const AudioClip& clip) {
  return greedy_decode(forward(model, clip));
}

TrainResult train(SurrogateAsr& model, const std::vector<TrainingExample>& corpus, const TrainConfig& cfg) {
  TrainResult result;
  if (cfg.epochs <= 0) return result;
  if (corpus.empty()) throw ArgumentError("train: empty corpus");
  if (cfg.batch_size <= 0 || !(cfg.step_size > 0.0)) throw ArgumentError("train: invalid optimizer settings");

  const AsrConfig& acfg = model.config();
  std::vector<Matrix> features;
  features.reserve(corpus.size());
  for (const auto& ex : corpus) {
    Matrix f = mfcc_forward(ex.clip, acfg.mfcc).frames;
    if (static_cast<std::size_t>(f.rows()) < ctc_min_frames(ex.target.labels)) {
      throw ArgumentError("train: clip too short for its transcript \"" + ex.target.text + "\"");
    }
    features.push_back(std::move(f));
  }

  // Standardization statistics over every training frame.
  {
    Eigen::Index total = 0;
    RowVector sum = RowVector::Zero(acfg.mfcc.cepstral_coeffs);
    RowVector sq = RowVector::Zero(acfg.mfcc.cepstral_coeffs);
    for (const auto& f : features) {
      total += f.rows();
      sum += f.colwise().sum();
      sq += f.array().square().matrix().colwise().sum();
    }
    model.feature_mean = sum / static_cast<double>(total);
    const RowVector var = sq / static_cast<double>(total) - model.feature_mean.array().square().matrix();
    model.feature_std = var.array().max(1e-6).sqrt().matrix();
  }

  AsrGradients m1 = AsrGradients::zeros_like(model);
  AsrGradients m2 = AsrGradients::zeros_like(model);
  long step = 0;
  auto adam = [&](auto& param, auto& grad, auto& mom, auto& vel) {
    mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * grad;
    vel = cfg.beta2 * vel + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    param.array() -= cfg.step_size * (mom.array() / c1) / ((vel.array() / c2).sqrt() + cfg.epsilon);
  };

  auto training_wer = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Transcript ref = Transcript::from_text(corpus[i].target.text);
      acc += wer(ref, greedy_decode(forward_features(model, features[i])));
    }
    return acc / static_cast<double>(corpus.size());
  };

  std::vector<std::size_t> order(corpus.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(acfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      std::vector<AsrGradients> parts(end - begin);
      std::vector<double> losses(end - begin);
      detail::parallel_for(end - begin, [&](std::size_t j) {
        const std::size_t idx = order[begin + j];
        AsrForwardContext ctx;
        const Matrix lp = forward_features(model, features[idx], &ctx);
        const CtcResult ctc = ctc_loss(lp, corpus[idx].target.labels, Alphabet::kBlank);
        losses[j] = ctc.loss;
        parts[j] = AsrGradients::zeros_like(model);
        const CtcGradient g = ctc_backward(ctc);
        if (g.valid) backward_network(model, ctx, g.grad, &parts[j]);
      });
      AsrGradients grad = AsrGradients::zeros_like(model);
      for (std::size_t j = 0; j < parts.size(); ++j) {
        grad += parts[j];
        epoch_loss += losses[j];
      }
      grad *= 1.0 / static_cast<double>(parts.size());
      ++step;
      adam(model.w1, grad.w1, m1.w1, m2.w1);
      adam(model.w2, grad.w2, m1.w2, m2.w2);
      adam(model.w3, grad.w3, m1.w3, m2.w3);
      adam(model.b1, grad.b1, m1.b1, m2.b1);
      adam(model.b2, grad.b2, m1.b2, m2.b2);
      adam(model.b3, grad.b3, m1.b3, m2.b3);
    }
    const double mean_loss = epoch_loss / static_cast<double>(corpus.size());
    if (!std::isfinite(mean_loss) || !model.w1.allFinite() || !model.w3.allFinite()) {
      throw NumericalError("train: loss diverged at epoch " + std::to_string(epoch));
    }
    result.loss_curve.push_back(mean_loss);
    result.epochs_run = epoch + 1;

    const bool last = epoch + 1 == cfg.epochs;
    const bool check = cfg.target_wer >= 0.0 && cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0;
    double current_wer = -1.0;
    if (check || last) {
      current_wer = training_wer();
      result.final_wer = current_wer;
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean_loss, current_wer);
    if (check && current_wer <= cfg.target_wer) break;
  }
  return result;
}

}  // namespace uapkit
