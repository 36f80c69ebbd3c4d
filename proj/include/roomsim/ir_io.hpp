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

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "roomsim/error.hpp"
#include "roomsim/impulse_response.hpp"
#include "roomsim/wav.hpp"

namespace roomsim {

inline nlohmann::json to_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

inline Vec3 vec3_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) {
    fail(Errc::kFormat, "field '" + field + "' must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& wav) {
  std::filesystem::path p = wav;
  p.replace_extension(".json");
  return p;
}

// Sidecar schema. The fixed field names are part of the file contract.
inline nlohmann::json sidecar_json(const ImpulseResponse& ir) {
  const IrMetadata& m = ir.metadata();
  nlohmann::json j = nlohmann::json::object();
  j["engine"] = m.engine;
  j["seed"] = m.seed;
  j["room_dims_m"] = m.room_dims ? to_json(*m.room_dims) : nlohmann::json();
  j["source_m"] = m.source ? to_json(*m.source) : nlohmann::json();
  nlohmann::json mics = nlohmann::json::array();
  for (const Vec3& mic : m.mics) mics.push_back(to_json(mic));
  j["mics_m"] = mics;
  j["t60_target_s"] = m.t60_target ? nlohmann::json(*m.t60_target)
                                   : nlohmann::json();
  j["sample_rate_hz"] = ir.sample_rate();
  for (const auto& [key, value] : m.extra.items()) {
    if (!j.contains(key)) j[key] = value;
  }
  return j;
}

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) fail(Errc::kIo, "cannot open " + tmp.string() + " for writing");
    os << text;
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(Errc::kIo, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::kIo, "cannot move file into place: " + path.string());
  }
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(Errc::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, path.string() + ": " + e.what());
  }
}

// Writes <path> (float32 WAV) and its ".json" sidecar.
inline void write_ir(const std::filesystem::path& wav_path,
                     const ImpulseResponse& ir) {
  write_wav(wav_path, ir.channels(), ir.sample_rate());
  try {
    write_text_atomic(sidecar_path(wav_path), sidecar_json(ir).dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(wav_path, ec);
    throw;
  }
}

inline IrMetadata metadata_from_sidecar(const nlohmann::json& j) {
  IrMetadata m;
  try {
    m.engine = j.value("engine", std::string());
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("room_dims_m") && !j["room_dims_m"].is_null()) {
      m.room_dims = vec3_from_json(j["room_dims_m"], "room_dims_m");
    }
    if (j.contains("source_m") && !j["source_m"].is_null()) {
      m.source = vec3_from_json(j["source_m"], "source_m");
    }
    if (j.contains("mics_m")) {
      for (const auto& mic : j["mics_m"]) {
        m.mics.push_back(vec3_from_json(mic, "mics_m"));
      }
    }
    if (j.contains("t60_target_s") && !j["t60_target_s"].is_null()) {
      m.t60_target = j["t60_target_s"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, std::string("malformed sidecar: ") + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "engine" && key != "seed" && key != "room_dims_m" &&
        key != "source_m" && key != "mics_m" && key != "t60_target_s" &&
        key != "sample_rate_hz") {
      m.extra[key] = value;
    }
  }
  return m;
}

// Reads a WAV and, when present, its sidecar.
inline ImpulseResponse read_ir(const std::filesystem::path& wav_path) {
  WavData wav = read_wav(wav_path);
  IrMetadata meta;
  const auto side = sidecar_path(wav_path);
  if (std::filesystem::exists(side)) {
    meta = metadata_from_sidecar(read_json_file(side));
  }
  return ImpulseResponse(std::move(wav.channels), wav.sample_rate,
                         std::move(meta));
}

}  // namespace roomsim
