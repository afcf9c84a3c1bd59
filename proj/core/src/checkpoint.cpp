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

// Binary model checkpoint. Layout (little-endian) is documented in
// docs/checkpoint-format.md; bump kVersion on any change.

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "uapkit/asr.hpp"
#include "uapkit/errors.hpp"

namespace uapkit {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'U', 'A', 'P', 'K', 'A', 'S', 'R', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename M>
  void put_array(const M& m) {
    put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(m(r, c));
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw FormatError(name_ + ": truncated checkpoint");
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    if (n > 4096) throw FormatError(name_ + ": implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw FormatError(name_ + ": truncated checkpoint");
    return s;
  }
  template <typename M>
  void get_array(M& m, const char* what) {
    const auto rows = get<std::uint32_t>();
    const auto cols = get<std::uint32_t>();
    if (rows != m.rows() || cols != m.cols()) {
      throw FormatError(name_ + ": array '" + what + "' has shape " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", header implies " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>();
    }
  }

 private:
  std::istream& in_;
  std::string name_;
};

}  // namespace

void save_model(const SurrogateAsr& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(Alphabet::kSize);
  w.put<std::uint32_t>(Alphabet::kBlank);
  w.put_string(std::string(Alphabet::kSymbols));

  const AsrConfig& c = model.config();
  w.put<std::int32_t>(c.mfcc.sample_rate);
  w.put<std::int32_t>(c.mfcc.frame_length);
  w.put<std::int32_t>(c.mfcc.frame_step);
  w.put<std::int32_t>(c.mfcc.fft_size);
  w.put<std::int32_t>(c.mfcc.mel_filters);
  w.put<std::int32_t>(c.mfcc.cepstral_coeffs);
  w.put<double>(c.mfcc.preemphasis);
  w.put<double>(c.mfcc.log_floor);
  w.put<double>(c.mfcc.low_hz);
  w.put<double>(c.mfcc.high_hz);
  w.put<std::int32_t>(c.context);
  w.put<std::int32_t>(c.hidden1);
  w.put<std::int32_t>(c.hidden2);
  w.put<double>(c.relu_cap);
  w.put<std::uint64_t>(c.seed);

  w.put_array(model.feature_mean);
  w.put_array(model.feature_std);
  w.put_array(model.w1);
  w.put_array(model.b1);
  w.put_array(model.w2);
  w.put_array(model.b2);
  w.put_array(model.w3);
  w.put_array(model.b3);
  if (!out) throw IoError("short write to " + path.string());
}

SurrogateAsr load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError(path.string() + ": not a uapkit model checkpoint");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw UnsupportedFormatError(path.string() + ": checkpoint version " + std::to_string(version));
  }
  if (r.get<std::uint32_t>() != Alphabet::kSize || r.get<std::uint32_t>() != Alphabet::kBlank ||
      r.get_string() != Alphabet::kSymbols) {
    throw UnsupportedFormatError(path.string() + ": checkpoint alphabet differs from this build");
  }

  AsrConfig c;
  c.mfcc.sample_rate = r.get<std::int32_t>();
  c.mfcc.frame_length = r.get<std::int32_t>();
  c.mfcc.frame_step = r.get<std::int32_t>();
  c.mfcc.fft_size = r.get<std::int32_t>();
  c.mfcc.mel_filters = r.get<std::int32_t>();
  c.mfcc.cepstral_coeffs = r.get<std::int32_t>();
  c.mfcc.preemphasis = r.get<double>();
  c.mfcc.log_floor = r.get<double>();
  c.mfcc.low_hz = r.get<double>();
  c.mfcc.high_hz = r.get<double>();
  c.context = r.get<std::int32_t>();
  c.hidden1 = r.get<std::int32_t>();
  c.hidden2 = r.get<std::int32_t>();
  c.relu_cap = r.get<double>();
  c.seed = r.get<std::uint64_t>();
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  SurrogateAsr model(c);
  r.get_array(model.feature_mean, "feature_mean");
  r.get_array(model.feature_std, "feature_std");
  r.get_array(model.w1, "w1");
  r.get_array(model.b1, "b1");
  r.get_array(model.w2, "w2");
  r.get_array(model.b2, "b2");
  r.get_array(model.w3, "w3");
  r.get_array(model.b3, "b3");
  return model;
}

}  // namespace uapkit
