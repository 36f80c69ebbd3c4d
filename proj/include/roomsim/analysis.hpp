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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "roomsim/error.hpp"
#include "roomsim/impulse_response.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

inline constexpr double kEdcFloorDb = -120.0;
inline constexpr double kT30UpperDb = -5.0;
inline constexpr double kT30LowerDb = -35.0;
inline constexpr double kDirectWindowS = 0.0025;
inline constexpr double kEarlyWindowS = 0.050;

// Schroeder energy decay curve in dB, one value per IR sample.
struct EnergyDecayCurve {
  std::vector<double> db;
  double sample_rate = 0.0;
};

inline EnergyDecayCurve schroeder_edc(std::span<const double> h,
                                      double sample_rate) {
  require(sample_rate > 0.0, "sample rate must be positive");
  std::vector<double> tail(h.size());
  double acc = 0.0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    tail[i] = acc;
  }
  if (h.empty() || acc <= 0.0) {
    fail(Errc::kSilentIr, "impulse response channel is silent");
  }
  EnergyDecayCurve edc;
  edc.sample_rate = sample_rate;
  edc.db.resize(h.size());
  const double total = tail.front();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double r = tail[i] / total;
    edc.db[i] = r > 0.0 ? std::max(10.0 * std::log10(r), kEdcFloorDb)
                        : kEdcFloorDb;
  }
  return edc;
}

inline EnergyDecayCurve schroeder_edc(const ImpulseResponse& ir,
                                      std::size_t channel) {
  return schroeder_edc(ir.channel(channel), ir.sample_rate());
}

// T30 estimate: least-squares line through the EDC between -5 and -35 dB,
// extrapolated to 60 dB of decay.
inline double estimate_t60(const EnergyDecayCurve& edc) {
  const auto& v = edc.db;
  require(!v.empty() && edc.sample_rate > 0.0, "empty energy decay curve");
  const double deepest = *std::min_element(v.begin(), v.end());
  if (deepest > kT30LowerDb) throw InsufficientDecayError(deepest);
  std::size_t first = 0;
  while (v[first] > kT30UpperDb) ++first;
  std::size_t last = first;
  while (v[last] > kT30LowerDb) ++last;
  // Mean-centered least squares over samples [first, last].
  const double n = static_cast<double>(last - first + 1);
  double mean_t = 0.0, mean_y = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    mean_t += static_cast<double>(i);
    mean_y += v[i];
  }
  mean_t /= n;
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double dt = static_cast<double>(i) - mean_t;
    sxy += dt * (v[i] - mean_y);
    sxx += dt * dt;
  }
  if (sxx <= 0.0) {
    // Decay of 30 dB within a single sample.
    return 2.0 / edc.sample_rate;
  }
  const double slope_db_per_s = sxy / sxx * edc.sample_rate;
  if (!(slope_db_per_s < 0.0)) throw InsufficientDecayError(deepest);
  return -60.0 / slope_db_per_s;
}

// Sample indices splitting a channel into direct [0, direct_end),
// early [direct_end, early_end) and late [early_end, length).
struct Segmentation {
  std::size_t direct_arrival = 0;
  std::size_t direct_end = 0;
  std::size_t early_end = 0;
};

inline Segmentation segment_by_distance(double distance_m, double sample_rate,
                                        std::size_t length) {
  Segmentation s;
  s.direct_arrival = static_cast<std::size_t>(
      std::llround(distance_m / kSpeedOfSound * sample_rate));
  const auto direct_window =
      static_cast<std::size_t>(std::llround(kDirectWindowS * sample_rate));
  const auto early_window =
      static_cast<std::size_t>(std::llround(kEarlyWindowS * sample_rate));
  s.direct_end = std::min(s.direct_arrival + direct_window, length);
  s.early_end = std::min(s.direct_arrival + early_window, length);
  return s;
}

inline Segmentation segment_ir(const ImpulseResponse& ir,
                               std::size_t channel) {
  const IrMetadata& m = ir.metadata();
  if (!m.source || channel >= m.mics.size()) {
    fail(Errc::kMetadataRequired,
         "segmentation needs source and receiver positions in the IR "
         "metadata (channel " + std::to_string(channel) + ")");
  }
  ir.channel(channel);  // range check
  return segment_by_distance(distance(*m.source, m.mics[channel]),
                             ir.sample_rate(), ir.length());
}

struct RegionEnergy {
  double direct = 0.0;
  double early = 0.0;
  double late = 0.0;

  double total() const { return direct + early + late; }
  double late_share() const {
    const double t = total();
    return t > 0.0 ? late / t : 0.0;
  }
};

inline RegionEnergy region_energy(std::span<const double> h,
                                  const Segmentation& seg) {
  RegionEnergy e;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double p = h[i] * h[i];
    if (i < seg.direct_end) {
      e.direct += p;
    } else if (i < seg.early_end) {
      e.early += p;
    } else {
      e.late += p;
    }
  }
  return e;
}

inline RegionEnergy region_energy(const ImpulseResponse& ir,
                                  std::size_t channel,
                                  const Segmentation& seg) {
  return region_energy(ir.channel(channel), seg);
}

// 10 log10(direct / reverberant); +inf when nothing follows the direct
// window.
inline double direct_to_reverberant_ratio(const ImpulseResponse& ir,
                                          std::size_t channel,
                                          const Segmentation& seg) {
  require(seg.direct_end <= ir.length() && seg.early_end <= ir.length() &&
              seg.direct_end <= seg.early_end,
          "segmentation does not fit the impulse response");
  const RegionEnergy e = region_energy(ir, channel, seg);
  const double reverberant = e.early + e.late;
  if (reverberant <= 0.0) return std::numeric_limits<double>::infinity();
  if (e.direct <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(e.direct / reverberant);
}

}  // namespace roomsim
