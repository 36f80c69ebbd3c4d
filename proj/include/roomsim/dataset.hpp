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

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/error.hpp"
#include "roomsim/ir_io.hpp"
#include "roomsim/parallel.hpp"
#include "roomsim/room_config.hpp"
#include "roomsim/simulate.hpp"

namespace roomsim {

struct DatasetOptions {
  SamplerOptions sampler;
  std::size_t workers = 1;
  // Called after each finished item with (items done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct ManifestItem {
  std::size_t index = 0;
  std::filesystem::path wav;  // absolute or relative to the manifest
  RoomConfig config;
};

struct Manifest {
  std::string engine;
  std::uint64_t seed = 0;
  std::vector<ManifestItem> items;
  std::filesystem::path path;  // where it was read from / written to
  std::size_t generated = 0;   // items simulated in this run (not resumed)
};

inline std::string dataset_file_name(Engine engine, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "rir_%s_%05zu.wav", engine_name(engine),
                index);
  return buf;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& dir,
                                           Engine engine) {
  return dir / (std::string("manifest_") + engine_name(engine) + ".json");
}

inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json items = nlohmann::json::array();
  for (const ManifestItem& it : m.items) {
    items.push_back({{"index", it.index},
                     {"wav", it.wav.generic_string()},
                     {"config", to_json(it.config)}});
  }
  return {{"engine", m.engine},
          {"seed", m.seed},
          {"count", m.items.size()},
          {"items", items}};
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  Manifest m;
  m.path = path;
  try {
    m.engine = j.at("engine").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& it : j.at("items")) {
      ManifestItem item;
      item.index = it.at("index").get<std::size_t>();
      item.wav = it.at("wav").get<std::string>();
      item.config = room_config_from_json(it.at("config"));
      m.items.push_back(std::move(item));
    }
    if (j.at("count").get<std::size_t>() != m.items.size()) {
      fail(Errc::kFormat, path.string() + ": count does not match items");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kFormat, path.string() + ": " + e.what());
  }
  return m;
}

// Resolves an item's WAV path against the manifest location.
inline std::filesystem::path resolve_item(const Manifest& m,
                                          const ManifestItem& item) {
  if (item.wav.is_absolute() || m.path.empty()) return item.wav;
  return m.path.parent_path() / item.wav;
}

// An existing output is reused only if its sidecar describes the same
// config and engine and its WAV has the expected shape.
inline bool dataset_item_valid(const std::filesystem::path& wav,
                               const RoomConfig& config, Engine engine,
                               const SimulationParams& params) {
  std::error_code ec;
  if (!std::filesystem::exists(wav, ec) ||
      !std::filesystem::exists(sidecar_path(wav), ec)) {
    return false;
  }
  try {
    const nlohmann::json side = read_json_file(sidecar_path(wav));
    if (side.value("engine", std::string()) != engine_name(engine)) return false;
    if (!side.contains("config") ||
        !(room_config_from_json(side["config"]) == config)) {
      return false;
    }
    const WavData data = read_wav(wav);
    return data.channels.size() == config.mics_m.size() &&
           data.sample_rate == params.trace.fs &&
           data.channels.front().size() == params.trace.n_bins();
  } catch (const Error&) {
    return false;
  }
}

// Simulates n sampled rooms into out_dir as rir_<engine>_<index>.wav plus
// sidecars and writes manifest_<engine>.json. Items whose outputs already
// exist and verify are skipped, so an interrupted run can be resumed.
inline Manifest generate_dataset(std::size_t n, std::uint64_t seed,
                                 Engine engine, const SimulationParams& params,
                                 const std::filesystem::path& out_dir,
                                 const DatasetOptions& opts = {}) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  Manifest manifest;
  manifest.engine = engine_name(engine);
  manifest.seed = seed;
  manifest.items.resize(n);
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> generated{0};
  parallel_for(n, opts.workers, [&](std::size_t i) {
    ManifestItem& item = manifest.items[i];
    item.index = i;
    item.config = sample_config(seed, i, opts.sampler);
    item.wav = dataset_file_name(engine, i);
    const std::filesystem::path wav = out_dir / item.wav;
    SimulationParams p = params;
    p.absorption_model = opts.sampler.absorption_model;
    p.trace.seed = derive_seed(seed, {0x6761730000000000ULL, i});
    p.trace.workers = 1;
    if (!dataset_item_valid(wav, item.config, engine, p)) {
      ImpulseResponse ir = simulate_rir(item.config, engine, p);
      ir.metadata().extra["dataset_seed"] = seed;
      ir.metadata().extra["index"] = i;
      try {
        write_ir(wav, ir);
      } catch (const Error& e) {
        fail(Errc::kIo, wav.string() + ": " + e.what());
      }
      ++generated;
    }
    const std::size_t finished = ++done;
    if (opts.progress) opts.progress(finished, n);
  });
  manifest.path = manifest_path(out_dir, engine);
  manifest.generated = generated;
  write_text_atomic(manifest.path, to_json(manifest).dump(2) + "\n");
  return manifest;
}

}  // namespace roomsim
