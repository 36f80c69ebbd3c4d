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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/error.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

struct IrMetadata {
  std::string engine;  // "image" | "gas"
  std::uint64_t seed = 0;
  std::optional<Vec3> room_dims;
  std::optional<Vec3> source;
  std::vector<Vec3> mics;
  std::optional<double> t60_target;
  // Engine-specific extras (trace parameters, image order, ...), written
  // into the sidecar next to the fixed fields.
  nlohmann::json extra = nlohmann::json::object();
};

// Multichannel sampled pressure response.
class ImpulseResponse {
 public:
  ImpulseResponse() = default;
  ImpulseResponse(std::vector<std::vector<double>> channels,
                  double sample_rate, IrMetadata meta = {})
      : channels_(std::move(channels)),
        sample_rate_(sample_rate),
        meta_(std::move(meta)) {
    require(sample_rate_ > 0.0, "sample rate must be positive");
    require(!channels_.empty(), "impulse response needs a channel");
    require(!channels_.front().empty(), "impulse response is empty");
    for (const auto& ch : channels_) {
      require(ch.size() == channels_.front().size(),
              "impulse response channels differ in length");
    }
  }

  std::size_t n_channels() const { return channels_.size(); }
  std::size_t length() const { return channels_.front().size(); }
  double sample_rate() const { return sample_rate_; }
  const std::vector<double>& channel(std::size_t c) const {
    require(c < channels_.size(), "channel " + std::to_string(c) +
                                      " out of range (have " +
                                      std::to_string(channels_.size()) + ")");
    return channels_[c];
  }
  std::vector<double>& channel(std::size_t c) {
    require(c < channels_.size(), "channel index out of range");
    return channels_[c];
  }
  const std::vector<std::vector<double>>& channels() const {
    return channels_;
  }
  const IrMetadata& metadata() const { return meta_; }
  IrMetadata& metadata() { return meta_; }

 private:
  std::vector<std::vector<double>> channels_;
  double sample_rate_ = 0.0;
  IrMetadata meta_;
};

}  // namespace roomsim
