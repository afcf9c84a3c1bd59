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

#include <complex>
#include <span>

namespace uapkit::detail {

// Thin wrapper over cached FFTW plans of a given size. Plans are created with
// FFTW_ESTIMATE so results are reproducible run to run.
class RealFft {
 public:
  explicit RealFft(int n);

  int size() const noexcept { return n_; }
  int bins() const noexcept { return n_ / 2 + 1; }

  // in: n reals, out: n/2+1 complex bins (unnormalized).
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  // Hermitian half-spectrum (n/2+1 bins) to n reals, unnormalized. The input
  // is not modified.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace uapkit::detail
