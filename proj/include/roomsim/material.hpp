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

#include <array>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "roomsim/error.hpp"

namespace roomsim {

// Octave-band centers for multi-band mode.
inline constexpr std::array<double, 8> kOctaveCentersHz = {
    62.5, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};

// Per-band absorption (alpha) and scattering (s) coefficients. A single band
// means broadband.
class Material {
 public:
  Material() : Material(0.0, 0.0) {}
  Material(double absorption, double scattering)
      : Material(std::vector<double>{absorption},
                 std::vector<double>{scattering}) {}
  Material(std::vector<double> absorption, std::vector<double> scattering)
      : absorption_(std::move(absorption)), scattering_(std::move(scattering)) {
    require(!absorption_.empty(), "material needs at least one band");
    require(absorption_.size() == scattering_.size(),
            "material absorption and scattering band counts differ");
    for (std::size_t b = 0; b < absorption_.size(); ++b) {
      require(absorption_[b] >= 0.0 && absorption_[b] <= 1.0,
              "absorption must lie in [0, 1], got " +
                  std::to_string(absorption_[b]));
      require(scattering_[b] >= 0.0 && scattering_[b] <= 1.0,
              "scattering must lie in [0, 1], got " +
                  std::to_string(scattering_[b]));
    }
  }

  // Same coefficients replicated over n_bands.
  static Material uniform(double absorption, double scattering,
                          std::size_t n_bands) {
    return Material(std::vector<double>(n_bands, absorption),
                    std::vector<double>(n_bands, scattering));
  }

  std::size_t n_bands() const { return absorption_.size(); }
  double absorption(std::size_t band = 0) const { return absorption_[band]; }
  double scattering(std::size_t band = 0) const { return scattering_[band]; }
  const std::vector<double>& absorption_bands() const { return absorption_; }
  const std::vector<double>& scattering_bands() const { return scattering_; }

  double mean_absorption() const {
    return std::accumulate(absorption_.begin(), absorption_.end(), 0.0) /
           static_cast<double>(absorption_.size());
  }
  double mean_scattering() const {
    return std::accumulate(scattering_.begin(), scattering_.end(), 0.0) /
           static_cast<double>(scattering_.size());
  }

 private:
  std::vector<double> absorption_;
  std::vector<double> scattering_;
};

}  // namespace roomsim
