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

#include <stdexcept>
#include <string>

namespace uapkit {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes (see tools/uapkit.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on an argument (bad length, k == 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: broken WAV header, bad manifest, corrupt checkpoint.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input we deliberately refuse (stereo, 8-bit, 44.1 kHz).
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Topic files and key-value configs. Carries the offending line (1-based, 0
// when not applicable).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// NaN/inf where a finite value is required, e.g. training divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Fatal condition inside a streaming session (rate mismatch, broken pipe).
class StreamError : public Error {
 public:
  using Error::Error;
};

}  // namespace uapkit
