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

#include "uapkit/stream.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <fmt/format.h>

#include "fft.hpp"
#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

double parse_number(const std::string& tok, std::string_view line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tok.size() || !std::isfinite(v)) {
    throw ArgumentError(fmt::format("control command '{}': bad number '{}'", line, tok));
  }
  return v;
}

}  // namespace

ControlCommand ControlCommand::set_amplitude(double factor) {
  if (!(factor >= 0.0)) throw ArgumentError("amplitude factor must be >= 0");
  ControlCommand c;
  c.kind = Kind::kSetAmplitude;
  c.factor = factor;
  return c;
}

ControlCommand ControlCommand::set_vad(bool on, double threshold) {
  if (on && !(threshold > 0.0)) throw ArgumentError("VAD threshold must be > 0");
  ControlCommand c;
  c.kind = Kind::kSetVad;
  c.vad_on = on;
  c.threshold = threshold;
  return c;
}

ControlCommand ControlCommand::stop() { return ControlCommand{}; }

ControlCommand ControlCommand::parse(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.empty()) throw ArgumentError("empty control command");
  std::optional<std::size_t> at;
  if (tok.front().front() == '@') {
    const double off = parse_number(tok.front().substr(1), line);
    if (off < 0.0) throw ArgumentError(fmt::format("control command '{}': negative offset", line));
    at = static_cast<std::size_t>(off);
    tok.erase(tok.begin());
    if (tok.empty()) throw ArgumentError(fmt::format("control command '{}': missing verb", line));
  }
  ControlCommand cmd;
  const std::string& verb = tok.front();
  if (verb == "amp" && tok.size() == 2) {
    cmd = set_amplitude(parse_number(tok[1], line));
  } else if (verb == "vad" && tok.size() == 3 && tok[1] == "on") {
    cmd = set_vad(true, parse_number(tok[2], line));
  } else if (verb == "vad" && tok.size() == 2 && tok[1] == "off") {
    cmd = set_vad(false);
  } else if (verb == "stop" && tok.size() == 1) {
    cmd = stop();
  } else {
    throw ArgumentError(fmt::format("unknown control command '{}'", line));
  }
  cmd.at_sample = at;
  return cmd;
}

std::string ControlCommand::text() const {
  switch (kind) {
    case Kind::kSetAmplitude:
      return fmt::format("amp {}", factor);
    case Kind::kSetVad:
      return vad_on ? fmt::format("vad on {}", threshold) : std::string("vad off");
    case Kind::kStop:
      break;
  }
  return "stop";
}

void CommandChannel::push(ControlCommand cmd) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(cmd));
}

std::vector<ControlCommand> CommandChannel::drain() {
  std::lock_guard lock(mu_);
  std::vector<ControlCommand> out(queue_.begin(), queue_.end());
  queue_.clear();
  return out;
}

void CommandChannel::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
}

bool CommandChannel::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::vector<bool> vad_gate(const AudioClip& chunk, double threshold, double frame_seconds) {
  if (!(threshold > 0.0)) throw ArgumentError("vad_gate: threshold must be > 0");
  const auto frame = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frame_seconds * chunk.sample_rate)));
  std::vector<bool> mask(chunk.size(), false);
  for (std::size_t start = 0; start < chunk.size(); start += frame) {
    const std::size_t end = std::min(chunk.size(), start + frame);
    const double energy = mean_power(std::span<const double>(chunk.samples).subspan(start, end - start));
    if (energy >= threshold) std::fill(mask.begin() + static_cast<std::ptrdiff_t>(start),
                                       mask.begin() + static_cast<std::ptrdiff_t>(end), true);
  }
  return mask;
}

std::pair<AudioClip, InjectorState> process_chunk(InjectorState state, const AudioClip& chunk) {
  if (state.stopped) throw StreamError("injector session was stopped");
  const AudioClip& delta = state.perturbation.clip;
  if (delta.empty()) throw StreamError("injector has an empty perturbation");
  if (chunk.sample_rate != delta.sample_rate) {
    throw StreamError(fmt::format("stream rate {} Hz does not match perturbation rate {} Hz", chunk.sample_rate,
                                  delta.sample_rate));
  }
  AudioClip out = chunk;
  std::vector<bool> gate;
  if (state.vad_enabled) gate = vad_gate(chunk, state.vad_threshold, state.vad_frame_seconds);
  const std::size_t len = delta.size();
  std::size_t idx = state.phase;
  for (std::size_t i = 0; i < chunk.size(); ++i) {
    if (gate.empty() || gate[i]) {
      out.samples[i] = std::clamp(chunk.samples[i] + state.amplitude_factor * delta.samples[idx], -1.0, 1.0);
    }
    if (++idx == len) idx = 0;
  }
  state.phase = idx;
  state.position += chunk.size();
  return {std::move(out), std::move(state)};
}

Injector::Injector(Perturbation delta, double amplitude_factor) {
  if (!(amplitude_factor >= 0.0)) throw ArgumentError("Injector: amplitude factor must be >= 0");
  state_.perturbation = std::move(delta);
  state_.amplitude_factor = amplitude_factor;
}

void Injector::apply(const ControlCommand& cmd) {
  switch (cmd.kind) {
    case ControlCommand::Kind::kSetAmplitude:
      state_.amplitude_factor = cmd.factor;
      break;
    case ControlCommand::Kind::kSetVad:
      state_.vad_enabled = cmd.vad_on;
      if (cmd.vad_on) state_.vad_threshold = cmd.threshold;
      break;
    case ControlCommand::Kind::kStop:
      state_.stopped = true;
      break;
  }
  log_.push_back({state_.position, cmd.text()});
}

void Injector::poll(CommandChannel& channel) {
  for (auto& cmd : channel.drain()) pending_.push_back(std::move(cmd));
  std::vector<ControlCommand> later;
  for (const auto& cmd : pending_) {
    if (state_.stopped) break;
    if (cmd.at_sample && *cmd.at_sample > state_.position) {
      later.push_back(cmd);
    } else {
      apply(cmd);
    }
  }
  pending_ = std::move(later);
}

AudioClip Injector::process_chunk(const AudioClip& chunk) {
  auto [out, next] = uapkit::process_chunk(std::move(state_), chunk);
  state_ = std::move(next);
  return std::move(out);
}

std::string Injector::command_log_text() const {
  std::string out;
  for (const auto& e : log_) out += fmt::format("@{} {}\n", e.sample_offset, e.command);
  return out;
}

AudioClip noise_cancel(const AudioClip& perturbed, std::size_t delta_length, SampleRange silence) {
  if (delta_length == 0) throw ArgumentError("noise_cancel: delta_length must be positive");
  if (silence.end > perturbed.size() || silence.begin > silence.end) {
    throw ArgumentError("noise_cancel: silence window outside the clip");
  }
  if (silence.size() < delta_length) {
    throw ArgumentError(fmt::format("noise_cancel: silence window of {} samples is shorter than one period ({})",
                                    silence.size(), delta_length));
  }
  const std::size_t len = delta_length;
  const std::size_t periods = silence.size() / len;
  std::vector<double> estimate(len, 0.0);
  for (std::size_t m = 0; m < periods; ++m) {
    const std::size_t base = silence.begin + m * len;
    for (std::size_t j = 0; j < len; ++j) estimate[j] += perturbed.samples[base + j];
  }
  for (double& v : estimate) v /= static_cast<double>(periods);

  // Fold the speech-free window onto one period (phase measured from the
  // window start) and find the circular lag that best matches the estimate.
  // Speech outside the window would swamp the correlation.
  std::vector<double> folded(len, 0.0);
  for (std::size_t n = silence.begin; n < silence.end; ++n) {
    const std::size_t j = (n + len - silence.begin % len) % len;
    folded[j] += perturbed.samples[n];
  }
  const detail::RealFft fft(static_cast<int>(len));
  std::vector<std::complex<double>> fe(static_cast<std::size_t>(fft.bins()));
  std::vector<std::complex<double>> ff(static_cast<std::size_t>(fft.bins()));
  fft.forward(estimate, fe);
  fft.forward(folded, ff);
  for (std::size_t k = 0; k < fe.size(); ++k) ff[k] *= std::conj(fe[k]);
  std::vector<double> corr(len);
  fft.inverse(ff, corr);
  const std::size_t lag = static_cast<std::size_t>(std::distance(corr.begin(), std::max_element(corr.begin(), corr.end())));
  // A flat correlation (silent estimate) carries no phase information.
  const std::size_t shift = linf_norm(estimate) > 0.0 ? lag : 0;

  AudioClip out = perturbed;
  for (std::size_t n = 0; n < out.size(); ++n) {
    const std::size_t j = (n + len - silence.begin % len) % len;
    out.samples[n] -= estimate[(j + len - shift) % len];
  }
  return out;
}

}  // namespace uapkit
