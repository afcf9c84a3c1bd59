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
#include <vector>

#include "uapkit/alphabet.hpp"
#include "uapkit/audio.hpp"
#include "uapkit/ctc.hpp"
#include "uapkit/matrix.hpp"
#include "uapkit/mfcc.hpp"
#include "uapkit/transcript.hpp"

namespace uapkit {

struct AsrConfig {
  MfccConfig mfcc;
  int context = 4;  // frames stacked on each side of the center frame
  int hidden1 = 128;
  int hidden2 = 128;
  double relu_cap = 20.0;
  std::uint64_t seed = 1;

  int input_dim() const noexcept { return (2 * context + 1) * mfcc.cepstral_coeffs; }
  void validate() const;
  bool operator==(const AsrConfig&) const = default;
};

// Dense character-level CTC recognizer:
//   MFCC -> per-coefficient standardization -> +-context frame stacking
//   -> relu20(W1) -> relu20(W2) -> W3 -> log-softmax over Alphabet::kSize.
// Weights are stored out x in so a layer is  X * W^T + b  on row-major batches.
class SurrogateAsr {
 public:
  SurrogateAsr() : SurrogateAsr(AsrConfig{}) {}
  explicit SurrogateAsr(const AsrConfig& cfg);

  const AsrConfig& config() const noexcept { return cfg_; }

  Matrix w1, w2, w3;
  RowVector b1, b2, b3;
  RowVector feature_mean;  // 1 x C
  RowVector feature_std;   // 1 x C, strictly positive

  std::size_t parameter_count() const noexcept;
  bool operator==(const SurrogateAsr& other) const;

 private:
  AsrConfig cfg_;
};

// Activations kept by forward for the reverse pass.
struct AsrForwardContext {
  MfccContext mfcc;
  Matrix stacked;   // T x input_dim
  Matrix pre1, pre2;
  Matrix act1, act2;
  Matrix logprobs;  // T x kSize
};

// T x Alphabet::kSize log-probabilities.
Matrix forward(const SurrogateAsr& model, const AudioClip& clip, AsrForwardContext* ctx = nullptr);

// Same network applied to precomputed MFCC frames (ctx->mfcc is left empty).
Matrix forward_features(const SurrogateAsr& model, const Matrix& features, AsrForwardContext* ctx = nullptr);

struct AsrGradients {
  Matrix w1, w2, w3;
  RowVector b1, b2, b3;

  static AsrGradients zeros_like(const SurrogateAsr& model);
  AsrGradients& operator+=(const AsrGradients& other);
  AsrGradients& operator*=(double s);
};

// d logits = g - softmax * rowsum(g), the log-softmax reverse pass.
Matrix log_softmax_backward(const Matrix& logprobs, const Matrix& d_logprobs);

// Pulls d loss / d logprobs back through the network. Accumulates parameter
// gradients into `params` when non-null and returns d loss / d MFCC frames.
Matrix backward_network(const SurrogateAsr& model, const AsrForwardContext& ctx, const Matrix& d_logprobs,
                        AsrGradients* params);

struct InputGradient {
  double loss = 0.0;
  bool valid = true;           // false when the CTC loss is infinite
  std::vector<double> grad;    // d loss / d sample, same length as the clip
  Matrix logprobs;
};

// Full chain: CTC -> dense layers -> frame unstacking -> MFCC reverse pass.
InputGradient input_gradient(const SurrogateAsr& model, const AudioClip& clip, std::span<const int> labels);
InputGradient input_gradient(const SurrogateAsr& model, const AudioClip& clip, const CtcTarget& target);

// Argmax per frame, merge repeats, drop blanks, split on spaces.
Transcript greedy_decode(const Matrix& logprobs);
std::string greedy_decode_text(const Matrix& logprobs);

Transcript transcribe(const SurrogateAsr& model, const AudioClip& clip);

struct TrainingExample {
  AudioClip clip;
  CtcTarget target;
};

struct TrainConfig {
  int epochs = 2000;
  double step_size = 2e-3;
  int batch_size = 4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Stop once the mean training WER drops to this value; negative disables.
  double target_wer = -1.0;
  int eval_every = 10;
  std::function<void(int epoch, double mean_loss, double mean_wer)> on_epoch;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean CTC loss per epoch
  int epochs_run = 0;
  double final_wer = 0.0;          // mean WER against the training transcripts
};

// Adam on the mean CTC loss over shuffled mini-batches. Deterministic given
// the model seed. Throws NumericalError when the loss turns non-finite.
TrainResult train(SurrogateAsr& model, const std::vector<TrainingExample>& corpus, const TrainConfig& cfg);

// Checkpoint container, see docs/checkpoint-format.md.
void save_model(const SurrogateAsr& model, const std::filesystem::path& path);
SurrogateAsr load_model(const std::filesystem::path& path);

}  // namespace uapkit
