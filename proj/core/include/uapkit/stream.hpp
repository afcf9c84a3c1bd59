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

#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uapkit/audio.hpp"

namespace uapkit {

// Runtime control message for an injector. Text form, one per line:
//   amp <factor>
//   vad on <threshold> | vad off
//   stop
// Any line may be prefixed with "@<sample>" to take effect at the first chunk
// boundary at or after that stream offset.
struct ControlCommand {
  enum class Kind { kSetAmplitude, kSetVad, kStop };

  Kind kind = Kind::kStop;
  double factor = 1.0;     // kSetAmplitude
  bool vad_on = false;     // kSetVad
  double threshold = 0.0;  // kSetVad, mean-square energy per 20 ms frame
  std::optional<std::size_t> at_sample;

  static ControlCommand set_amplitude(double factor);
  static ControlCommand set_vad(bool on, double threshold = 0.0);
  static ControlCommand stop();

  // Throws ArgumentError on malformed text.
  static ControlCommand parse(std::string_view line);
  std::string text() const;  // without the @offset prefix
};

// Multi-producer queue between a control source and the injector. Producers
// may push at any time; the injector drains only between chunks.
class CommandChannel {
 public:
  void push(ControlCommand cmd);
  std::vector<ControlCommand> drain();
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::deque<ControlCommand> queue_;
  bool closed_ = false;
};

struct InjectorState {
  Perturbation perturbation;
  std::size_t phase = 0;        // next index into delta, < |delta|
  std::size_t position = 0;     // samples consumed so far
  double amplitude_factor = 1.0;
  bool vad_enabled = false;
  double vad_threshold = 0.0;
  double vad_frame_seconds = 0.020;
  bool stopped = false;
};

// Pure chunk step: returns the perturbed chunk and the advanced state.
// out[i] = clamp(chunk[i] + factor * delta[(phase + i) mod |delta|]) except
// where the voice-activity gate is closed.
std::pair<AudioClip, InjectorState> process_chunk(InjectorState state, const AudioClip& chunk);

// Per-sample mask: a frame (20 ms by default) is speech when its mean-square
// energy is >= threshold. A trailing partial frame is judged on its own samples.
std::vector<bool> vad_gate(const AudioClip& chunk, double threshold, double frame_seconds = 0.020);

struct CommandLogEntry {
  std::size_t sample_offset = 0;
  std::string command;
};

// Stateful wrapper used by the streaming tool: applies queued commands at
// chunk boundaries and records each one with its stream offset.
class Injector {
 public:
  explicit Injector(Perturbation delta, double amplitude_factor = 1.0);

  void apply(const ControlCommand& cmd);
  // Applies every drained command whose @offset (if any) has been reached;
  // later ones stay pending.
  void poll(CommandChannel& channel);
  AudioClip process_chunk(const AudioClip& chunk);

  const InjectorState& state() const noexcept { return state_; }
  bool stopped() const noexcept { return state_.stopped; }
  const std::vector<CommandLogEntry>& command_log() const noexcept { return log_; }
  std::string command_log_text() const;

 private:
  InjectorState state_;
  std::vector<ControlCommand> pending_;
  std::vector<CommandLogEntry> log_;
};

struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
};

// Eavesdropper-side cancellation of a periodic perturbation: average the
// delta_length-sized segments inside `silence`, align the estimate to the
// whole clip by circular cross-correlation, and subtract it everywhere.
AudioClip noise_cancel(const AudioClip& perturbed, std::size_t delta_length, SampleRange silence);

}  // namespace uapkit
