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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/error.hpp"
#include "roomsim/geometry.hpp"
#include "roomsim/ir_io.hpp"
#include "roomsim/materials.hpp"
#include "roomsim/rng.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

// Far-field scenario ranges.
namespace protocol {
inline constexpr Vec3 kMinDims{3.0, 3.0, 2.5};
inline constexpr Vec3 kMaxDims{8.0, 10.0, 6.0};
inline constexpr double kMinT60 = 0.05;
inline constexpr double kMaxT60 = 0.5;
inline constexpr double kWallMargin = 0.3;
inline constexpr double kMinDistance = 0.5;
inline constexpr double kMaxDistance = 6.0;
inline constexpr std::size_t kMicCount = 6;
inline constexpr double kArrayRadius = 0.035;
inline constexpr double kDefaultScattering = 0.5;
inline constexpr int kMaxAttempts = 10000;
}  // namespace protocol

struct RoomConfig {
  Vec3 room_dims_m;
  double t60_target_s = 0.0;
  double scattering = protocol::kDefaultScattering;
  Vec3 source_m;
  Vec3 array_center_m;
  Vec3 array_axis{0.0, 0.0, 1.0};
  double array_rotation_rad = 0.0;
  std::vector<Vec3> mics_m;
  std::uint64_t seed = 0;
  std::size_t index = 0;

  friend bool operator==(const RoomConfig&, const RoomConfig&) = default;
};

// Same room, source and microphones (the fields that define the acoustic
// scene), ignoring bookkeeping such as seed and index.
inline bool same_geometry(const RoomConfig& a, const RoomConfig& b) {
  return a.room_dims_m == b.room_dims_m && a.t60_target_s == b.t60_target_s &&
         a.scattering == b.scattering && a.source_m == b.source_m &&
         a.mics_m == b.mics_m;
}

inline nlohmann::json to_json(const RoomConfig& c) {
  nlohmann::json mics = nlohmann::json::array();
  for (const Vec3& m : c.mics_m) mics.push_back(to_json(m));
  return {{"room_dims_m", to_json(c.room_dims_m)},
          {"t60_target_s", c.t60_target_s},
          {"scattering", c.scattering},
          {"source_m", to_json(c.source_m)},
          {"array_center_m", to_json(c.array_center_m)},
          {"array_axis", to_json(c.array_axis)},
          {"array_rotation_rad", c.array_rotation_rad},
          {"mics_m", mics},
          {"seed", c.seed},
          {"index", c.index}};
}

inline RoomConfig room_config_from_json(const nlohmann::json& j) {
  RoomConfig c;
  try {
    c.room_dims_m = vec3_from_json(j.at("room_dims_m"), "room_dims_m");
    c.t60_target_s = j.at("t60_target_s").get<double>();
    c.scattering = j.value("scattering", protocol::kDefaultScattering);
    c.source_m = vec3_from_json(j.at("source_m"), "source_m");
    c.array_center_m =
        vec3_from_json(j.at("array_center_m"), "array_center_m");
    if (j.contains("array_axis")) {
      c.array_axis = vec3_from_json(j["array_axis"], "array_axis");
    }
    c.array_rotation_rad = j.value("array_rotation_rad", 0.0);
    if (j.contains("mics_m")) {
      for (const auto& m : j["mics_m"]) {
        c.mics_m.push_back(vec3_from_json(m, "mics_m"));
      }
    } else {
      c.mics_m = circular_array(c.array_center_m, protocol::kArrayRadius,
                                protocol::kMicCount, c.array_axis,
                                c.array_rotation_rad);
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.index = j.value("index", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, std::string("malformed room config: ") + e.what());
  }
  return c;
}

// Lists every violated protocol constraint; empty when the config is valid.
inline std::vector<std::string> protocol_violations(const RoomConfig& c) {
  using namespace protocol;
  std::vector<std::string> v;
  const Vec3& d = c.room_dims_m;
  for (int a = 0; a < 3; ++a) {
    if (d[a] < kMinDims[a] || d[a] > kMaxDims[a]) {
      v.push_back("room_dims_m[" + std::to_string(a) + "] out of range");
    }
  }
  if (c.t60_target_s < kMinT60 || c.t60_target_s > kMaxT60) {
    v.push_back("t60_target_s out of range");
  }
  auto wall_ok = [&](const Vec3& p) {
    for (int a = 0; a < 3; ++a) {
      if (p[a] < kWallMargin || p[a] > d[a] - kWallMargin) return false;
    }
    return true;
  };
  if (!wall_ok(c.source_m)) v.push_back("source_m too close to a wall");
  if (c.mics_m.size() != kMicCount) v.push_back("mics_m must hold 6 points");
  for (const Vec3& m : c.mics_m) {
    if (!wall_ok(m)) {
      v.push_back("mics_m too close to a wall");
      break;
    }
  }
  const double dist = distance(c.source_m, c.array_center_m);
  if (dist < kMinDistance || dist > kMaxDistance) {
    v.push_back("source-array distance out of range");
  }
  for (const Vec3& m : c.mics_m) {
    if (std::abs(distance(m, c.array_center_m) - kArrayRadius) > 1e-9) {
      v.push_back("mics_m not on the array circle");
      break;
    }
  }
  return v;
}

struct SamplerOptions {
  double scattering = protocol::kDefaultScattering;
  AbsorptionModel absorption_model = AbsorptionModel::kEyring;
};

namespace detail {

inline Vec3 uniform_in_box(RandomStream& rng, const Vec3& lo, const Vec3& hi) {
  const double x = rng.uniform(lo.x, hi.x);
  const double y = rng.uniform(lo.y, hi.y);
  const double z = rng.uniform(lo.z, hi.z);
  return {x, y, z};
}

// Uniform source and array center with wall margins, rejection-sampled
// until the source-to-center distance is in range.
inline void sample_placement(RandomStream& rng, const Vec3& dims,
                             RoomConfig& c) {
  using namespace protocol;
  const Vec3 src_lo{kWallMargin, kWallMargin, kWallMargin};
  const Vec3 src_hi = dims - src_lo;
  // The array lies in the horizontal plane, so its footprint widens the
  // horizontal margins by the radius.
  const Vec3 arr_lo{kWallMargin + kArrayRadius, kWallMargin + kArrayRadius,
                    kWallMargin};
  const Vec3 arr_hi = dims - arr_lo;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec3 source = uniform_in_box(rng, src_lo, src_hi);
    const Vec3 center = uniform_in_box(rng, arr_lo, arr_hi);
    const double d = distance(source, center);
    if (d >= kMinDistance && d <= kMaxDistance) {
      c.source_m = source;
      c.array_center_m = center;
      c.array_rotation_rad = rng.uniform(0.0, 2.0 * kPi);
      c.mics_m = circular_array(center, kArrayRadius, kMicCount, c.array_axis,
                                c.array_rotation_rad);
      return;
    }
  }
  fail(Errc::kSamplingFailed,
       "no valid source/array placement after " +
           std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace detail

// Deterministic function of (seed, index).
inline RoomConfig sample_config(std::uint64_t seed, std::size_t index,
                                const SamplerOptions& opts = {}) {
  using namespace protocol;
  RandomStream rng(seed, {0x726f6f6d00000000ULL, index});
  RoomConfig c;
  c.seed = seed;
  c.index = index;
  c.scattering = opts.scattering;
  c.room_dims_m = detail::uniform_in_box(rng, kMinDims, kMaxDims);
  const double floor_t60 = min_t60(c.room_dims_m, opts.absorption_model);
  int attempt = 0;
  do {
    if (++attempt > kMaxAttempts) {
      fail(Errc::kSamplingFailed, "no achievable T60 in range for room " +
                                      std::to_string(index));
    }
    c.t60_target_s = rng.uniform(kMinT60, kMaxT60);
  } while (c.t60_target_s < floor_t60);
  detail::sample_placement(rng, c.room_dims_m, c);
  return c;
}

// Source and array placement for a given room, for callers that fix the
// room and T60 but not the positions.
inline RoomConfig sample_placement_for(const Vec3& dims, double t60,
                                       std::uint64_t seed,
                                       double scattering =
                                           protocol::kDefaultScattering) {
  RandomStream rng(seed, {0x706c616365000000ULL});
  RoomConfig c;
  c.seed = seed;
  c.room_dims_m = dims;
  c.t60_target_s = t60;
  c.scattering = scattering;
  detail::sample_placement(rng, dims, c);
  return c;
}

}  // namespace roomsim
