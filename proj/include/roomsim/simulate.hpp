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

#include <string>

#include "roomsim/error.hpp"
#include "roomsim/gas_engine.hpp"
#include "roomsim/image_engine.hpp"
#include "roomsim/materials.hpp"
#include "roomsim/room_config.hpp"

namespace roomsim {

enum class Engine { kImage, kGas };

inline const char* engine_name(Engine e) {
  return e == Engine::kImage ? "image" : "gas";
}

inline Engine parse_engine(const std::string& name) {
  if (name == "image") return Engine::kImage;
  if (name == "gas") return Engine::kGas;
  fail(Errc::kInvalidArgument,
       "unknown engine '" + name + "' (expected image or gas)");
}

struct SimulationParams {
  // fs, ir_length and seed here apply to both engines.
  TraceParams trace;
  // Image-method reflection order; negative selects default_image_order.
  int max_order = -1;
  bool fractional_delay = true;
  AbsorptionModel absorption_model = AbsorptionModel::kEyring;
};

inline Scene scene_for(const RoomConfig& config, AbsorptionModel model,
                       std::size_t n_bands = 1) {
  const double alpha =
      absorption_for_t60(config.room_dims_m, config.t60_target_s, model);
  return make_shoebox(config.room_dims_m,
                      Material::uniform(alpha, config.scattering, n_bands));
}

// Builds the shoebox for `config` (uniform absorption from its T60 target,
// uniform scattering) and renders one channel per microphone.
inline ImpulseResponse simulate_rir(const RoomConfig& config, Engine engine,
                                    const SimulationParams& params) {
  require(!config.mics_m.empty(), "config has no microphones");
  const Scene scene =
      scene_for(config, params.absorption_model, params.trace.n_bands);
  const double alpha = scene.materials().front().absorption();
  ImpulseResponse ir;
  if (engine == Engine::kImage) {
    const int order =
        params.max_order >= 0
            ? params.max_order
            : default_image_order(config.room_dims_m, config.t60_target_s);
    ImageRenderOptions opts;
    opts.fractional_delay = params.fractional_delay;
    opts.workers = params.trace.workers;
    ir = render_ir_image(scene, config.source_m, config.mics_m, order,
                         params.trace.fs, params.trace.ir_length, opts);
    ir.metadata().seed = params.trace.seed;
  } else {
    const EnergyHistogram hist =
        trace(scene, config.source_m, config.mics_m, params.trace);
    ir = histogram_to_ir(hist, params.trace);
  }
  IrMetadata& m = ir.metadata();
  m.room_dims = config.room_dims_m;
  m.source = config.source_m;
  m.mics = config.mics_m;
  m.t60_target = config.t60_target_s;
  m.extra["absorption"] = alpha;
  m.extra["absorption_model"] = model_name(params.absorption_model);
  m.extra["scattering"] = config.scattering;
  m.extra["config"] = to_json(config);
  return ir;
}

}  // namespace roomsim
