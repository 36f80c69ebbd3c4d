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
#include <limits>
#include <string>

#include "roomsim/error.hpp"
#include "roomsim/geometry.hpp"
#include "roomsim/material.hpp"

namespace roomsim {

// Sabine's constant 24 ln(10) / c, in s/m.
inline constexpr double kSabineConstant = 0.161;
inline constexpr double kMaxAbsorption = 0.99;

enum class AbsorptionModel { kSabine, kEyring };

inline const char* model_name(AbsorptionModel m) {
  return m == AbsorptionModel::kSabine ? "sabine" : "eyring";
}

inline AbsorptionModel parse_absorption_model(const std::string& name) {
  if (name == "sabine") return AbsorptionModel::kSabine;
  if (name == "eyring") return AbsorptionModel::kEyring;
  fail(Errc::kInvalidArgument, "unknown absorption model '" + name + "'");
}

inline double box_volume(const Vec3& d) { return d.x * d.y * d.z; }
inline double box_area(const Vec3& d) {
  return 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
}

// Shortest T60 a box can realize with uniform absorption <= 0.99.
inline double min_t60(const Vec3& dims,
                      AbsorptionModel model = AbsorptionModel::kSabine) {
  const double v = box_volume(dims);
  const double s = box_area(dims);
  if (model == AbsorptionModel::kSabine) {
    return kSabineConstant * v / (kMaxAbsorption * s);
  }
  return kSabineConstant * v / (-std::log(1.0 - kMaxAbsorption) * s);
}

// Uniform absorption solving T60 = 0.161 V / (alpha S).
inline double sabine_absorption(const Vec3& dims, double target_t60) {
  require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
          "room dimensions must be positive");
  require(target_t60 > 0.0, "target T60 must be positive");
  const double alpha =
      kSabineConstant * box_volume(dims) / (target_t60 * box_area(dims));
  // Relative slack so that T60 exactly at the clamp boundary is accepted.
  if (alpha > kMaxAbsorption * (1.0 + 1e-12)) {
    throw UnreachableT60Error(target_t60, min_t60(dims));
  }
  return std::min(alpha, kMaxAbsorption);
}

// Uniform absorption solving T60 = 0.161 V / (-S ln(1 - alpha)).
inline double eyring_absorption(const Vec3& dims, double target_t60) {
  require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
          "room dimensions must be positive");
  require(target_t60 > 0.0, "target T60 must be positive");
  const double alpha = 1.0 - std::exp(-kSabineConstant * box_volume(dims) /
                                      (target_t60 * box_area(dims)));
  if (alpha > kMaxAbsorption * (1.0 + 1e-12)) {
    throw UnreachableT60Error(target_t60,
                              min_t60(dims, AbsorptionModel::kEyring));
  }
  return std::min(alpha, kMaxAbsorption);
}

inline double absorption_for_t60(const Vec3& dims, double target_t60,
                                 AbsorptionModel model) {
  return model == AbsorptionModel::kSabine
             ? sabine_absorption(dims, target_t60)
             : eyring_absorption(dims, target_t60);
}

// Sabine prediction 0.161 V / sum(alpha_i S_i) using the band-averaged
// absorption of every surface (obstacle faces included; obstacle volume is
// removed from V).
inline double predicted_t60(const Scene& scene) {
  double absorption_area = 0.0;
  for (std::size_t i = 0; i < scene.triangles().size(); ++i) {
    absorption_area +=
        scene.material_of(i).mean_absorption() * scene.triangles()[i].area();
  }
  if (absorption_area <= 0.0) {
    fail(Errc::kInfiniteT60, "all surfaces have zero absorption; T60 is infinite");
  }
  return kSabineConstant * scene.volume() / absorption_area;
}

}  // namespace roomsim
