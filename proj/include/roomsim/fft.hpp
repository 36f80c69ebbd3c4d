// Copyright 2026 The roomsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "roomsim/error.hpp"

namespace roomsim {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

// Real-to-complex / complex-to-real transform pair of a fixed size. Buffers
// come from fftw_malloc so every instance of a given size runs the same
// kernels, which makes results bit-reproducible. Planning is serialized
// because the FFTW planner is not thread-safe; execution is.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        time_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        freq_(static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    require(n >= 2, "FFT size must be at least 2");
    if (!time_ || !freq_) fail(Errc::kIo, "FFT buffer allocation failed");
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    const int size = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(size, time_.get(), freq_.get(),
                                    FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, freq_.get(), time_.get(),
                                    FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // Time-domain working buffer (n values).
  std::span<double> time() { return {time_.get(), n_}; }
  // Frequency-domain working buffer (n/2 + 1 values).
  std::span<std::complex<double>> freq() {
    return {reinterpret_cast<std::complex<double>*>(freq_.get()), bins()};
  }

  // time() -> freq()
  void forward() { fftw_execute(forward_); }
  // freq() -> time(), unnormalized (scaled by n). Overwrites freq().
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  std::unique_ptr<double, detail::FftwFree> time_;
  std::unique_ptr<fftw_complex, detail::FftwFree> freq_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace roomsim
