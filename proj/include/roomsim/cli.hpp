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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "roomsim/augment.hpp"
#include "roomsim/dataset.hpp"
#include "roomsim/error.hpp"
#include "roomsim/ir_io.hpp"
#include "roomsim/ir_report.hpp"
#include "roomsim/simulate.hpp"

namespace roomsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPairing = 3;

inline constexpr const char* kCommands[] = {"simulate", "sample-rooms",
                                            "augment", "analyze", "compare"};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PairingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "4x5x3", "4,5,3" or "4 5 3".
inline Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  std::string s = text;
  std::replace(s.begin(), s.end(), 'x', ' ');
  std::replace(s.begin(), s.end(), 'X', ' ');
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  Vec3 v;
  std::string rest;
  if (!(is >> v.x >> v.y >> v.z) || (is >> rest)) {
    throw UsageError(flag + ": expected three numbers, got '" + text + "'");
  }
  return v;
}

inline std::pair<double, double> parse_range(const std::string& text,
                                             const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_lo = 0, used_hi = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double lo = std::stod(a, &used_lo);
    const double hi = std::stod(b, &used_hi);
    if (used_lo != a.size() || used_hi != b.size()) {
      throw std::invalid_argument(text);
    }
    if (lo > hi) throw UsageError(flag + ": low end exceeds high end");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError(flag + ": expected LOW:HIGH, got '" + text + "'");
  }
}

namespace detail {

// RoomConfig field names accepted in simulate config files.
inline const std::map<std::string, std::string>& room_config_aliases() {
  static const std::map<std::string, std::string> m = {
      {"room_dims_m", "room"},         {"t60_target_s", "t60"},
      {"source_m", "source"},          {"array_center_m", "array"},
      {"array_axis", "array-axis"},    {"array_rotation_rad", "array-rotation"},
  };
  return m;
}

inline std::string scalar_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw UsageError("config key '" + key + "': unsupported value " + v.dump());
}

inline void flatten_config(const nlohmann::json& obj, const std::string& command,
                           std::vector<std::string>& args) {
  for (const auto& [raw_key, value] : obj.items()) {
    if (value.is_object()) {
      if (raw_key == command) {
        flatten_config(value, command, args);
        continue;
      }
      if (std::find(std::begin(kCommands), std::end(kCommands), raw_key) !=
          std::end(kCommands)) {
        continue;
      }
      throw UsageError("config key '" + raw_key + "': nested tables are only "
                       "allowed per command");
    }
    std::string key = raw_key;
    if (command == "simulate") {
      if (key == "mics_m" || key == "index") continue;
      const auto alias = room_config_aliases().find(key);
      if (alias != room_config_aliases().end()) key = alias->second;
    }
    std::replace(key.begin(), key.end(), '_', '-');
    std::string text;
    if (value.is_array()) {
      for (const auto& e : value) {
        if (!text.empty()) text += ",";
        text += scalar_text(e, raw_key);
      }
    } else {
      text = scalar_text(value, raw_key);
    }
    args.push_back("--" + key + "=" + text);
  }
}

inline nlohmann::json load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("--config: cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();
  const std::string ext = path.extension().string();
  if (ext != ".toml") {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      if (ext == ".json") {
        throw UsageError("--config: " + path.string() + ": " + e.what());
      }
    }
  }
  try {
    const toml::table tbl = toml::parse(text, path.string());
    std::ostringstream js;
    js << toml::json_formatter{tbl};
    return nlohmann::json::parse(js.str());
  } catch (const toml::parse_error& e) {
    throw UsageError("--config: " + path.string() + ": " +
                     std::string(e.description()));
  }
}

// Replaces `--config FILE` after the subcommand by the file's settings,
// placed before the remaining flags so explicit flags win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  const auto cmd = std::find_if(args.begin(), args.end(), [](const auto& a) {
    return std::find(std::begin(kCommands), std::end(kCommands), a) !=
           std::end(kCommands);
  });
  if (cmd == args.end()) return args;
  const std::string command = *cmd;
  const std::size_t cmd_pos = static_cast<std::size_t>(cmd - args.begin());
  std::vector<std::string> head(args.begin(), args.begin() + cmd_pos + 1);
  std::vector<std::string> from_file, rest;
  for (std::size_t i = cmd_pos + 1; i < args.size(); ++i) {
    std::optional<std::string> file;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config: missing file name");
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    }
    if (file) {
      flatten_config(load_config_file(*file), command, from_file);
    } else {
      rest.push_back(args[i]);
    }
  }
  head.insert(head.end(), from_file.begin(), from_file.end());
  head.insert(head.end(), rest.begin(), rest.end());
  return head;
}

}  // namespace detail

struct EngineOptions {
  double fs = 16000.0;
  double ir_length = 0.6;
  std::size_t rays = 100000;
  std::size_t max_bounces = 200;
  double energy_cutoff = 1e-6;
  double receiver_radius = 0.0875;
  std::size_t bands = 1;
  int max_order = -1;
  bool nearest_sample = false;
  double scattering = protocol::kDefaultScattering;
  std::string absorption_model = "eyring";
  std::size_t workers = 1;

  void add_to(CLI::App* app) {
    app->add_option("--fs", fs, "Sample rate in Hz")->capture_default_str();
    app->add_option("--ir-length", ir_length, "IR length in seconds")
        ->capture_default_str();
    app->add_option("--rays", rays, "Rays traced (gas)")->capture_default_str();
    app->add_option("--max-bounces", max_bounces, "Bounce limit per ray (gas)")
        ->capture_default_str();
    app->add_option("--energy-cutoff", energy_cutoff,
                    "Ray termination threshold relative to initial ray energy")
        ->capture_default_str();
    app->add_option("--receiver-radius", receiver_radius,
                    "Receiver sphere radius in m (gas)")
        ->capture_default_str();
    app->add_option("--bands", bands, "1 (broadband) or 8 octave bands")
        ->capture_default_str();
    app->add_option("--max-order", max_order,
                    "Image reflection order; -1 picks it from the T60 target")
        ->capture_default_str();
    app->add_flag("--no-fractional-delay", nearest_sample,
                  "Round image arrivals to the nearest sample");
    app->add_option("--scattering", scattering, "Wall scattering coefficient")
        ->capture_default_str();
    app->add_option("--absorption-model", absorption_model,
                    "T60 to absorption mapping")
        ->check(CLI::IsMember({"sabine", "eyring"}))
        ->capture_default_str();
    app->add_option("--workers", workers, "Worker threads, 0 for all cores")
        ->capture_default_str();
  }

  SimulationParams params(std::uint64_t seed) const {
    SimulationParams p;
    p.trace.n_rays = rays;
    p.trace.max_bounces = max_bounces;
    p.trace.energy_cutoff = energy_cutoff;
    p.trace.receiver_radius = receiver_radius;
    p.trace.fs = fs;
    p.trace.ir_length = ir_length;
    p.trace.n_bands = bands;
    p.trace.seed = seed;
    p.trace.workers = workers;
    p.max_order = max_order;
    p.fractional_delay = !nearest_sample;
    p.absorption_model = parse_absorption_model(absorption_model);
    if (bands != 1 && bands != kOctaveCentersHz.size()) {
      throw UsageError("--bands: must be 1 or 8");
    }
    if (scattering < 0.0 || scattering > 1.0) {
      throw UsageError("--scattering: must lie in [0, 1]");
    }
    if (max_order < -1) throw UsageError("--max-order: must be >= -1");
    try {
      p.trace.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

inline void echo_seed(std::ostream& err, std::uint64_t seed) {
  err << "seed: " << seed << "\n";
}

inline bool strictly_inside(const Vec3& p, const Vec3& dims) {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] > 0.0 && p[a] < dims[a])) return false;
  }
  return true;
}

// ---- simulate ----

struct SimulateCommand {
  std::string room, source, array, axis = "0,0,1", engine = "gas", out;
  double t60 = 0.0;
  double rotation = 0.0;
  double array_radius = protocol::kArrayRadius;
  std::size_t mics = protocol::kMicCount;
  std::uint64_t seed = 0;
  EngineOptions engine_opts;

  void add_to(CLI::App* app) {
    app->add_option("--room", room, "Room size LxWxH in m")->required();
    app->add_option("--t60", t60, "Target T60 in s")->required();
    app->add_option("--source", source, "Source position x,y,z in m")
        ->required();
    app->add_option("--array", array, "Array center x,y,z in m")->required();
    app->add_option("--array-axis", axis, "Array plane normal")
        ->capture_default_str();
    app->add_option("--array-rotation", rotation,
                    "Rotation of mic 0 about the axis, radians")
        ->capture_default_str();
    app->add_option("--array-radius", array_radius, "Array radius in m")
        ->capture_default_str();
    app->add_option("--mics", mics, "Microphone count")->capture_default_str();
    app->add_option("--engine", engine, "image or gas")
        ->check(CLI::IsMember({"image", "gas"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--out", out, "Output WAV path")->required();
    engine_opts.add_to(app);
  }

  RoomConfig config() const {
    RoomConfig c;
    c.room_dims_m = parse_vec3(room, "--room");
    if (!(c.room_dims_m.x > 0 && c.room_dims_m.y > 0 && c.room_dims_m.z > 0)) {
      throw UsageError("--room: dimensions must be positive");
    }
    if (!(t60 > 0.0)) throw UsageError("--t60: must be positive");
    c.t60_target_s = t60;
    c.scattering = engine_opts.scattering;
    c.source_m = parse_vec3(source, "--source");
    if (!strictly_inside(c.source_m, c.room_dims_m)) {
      throw UsageError("--source: position lies outside the room");
    }
    c.array_center_m = parse_vec3(array, "--array");
    if (!strictly_inside(c.array_center_m, c.room_dims_m)) {
      throw UsageError("--array: position lies outside the room");
    }
    c.array_axis = parse_vec3(axis, "--array-axis");
    if (norm(c.array_axis) < 1e-12) {
      throw UsageError("--array-axis: must be non-zero");
    }
    c.array_axis = normalized(c.array_axis);
    if (!(array_radius > 0.0)) throw UsageError("--array-radius: must be positive");
    if (mics < 1) throw UsageError("--mics: must be at least 1");
    c.array_rotation_rad = rotation;
    c.mics_m = circular_array(c.array_center_m, array_radius, mics,
                              c.array_axis, rotation);
    for (std::size_t k = 0; k < c.mics_m.size(); ++k) {
      if (!strictly_inside(c.mics_m[k], c.room_dims_m)) {
        throw UsageError("--array: microphone " + std::to_string(k) +
                         " lies outside the room");
      }
    }
    c.seed = seed;
    return c;
  }

  int run(std::ostream& out_stream, std::ostream& err) const {
    echo_seed(err, seed);
    const RoomConfig c = config();
    const SimulationParams p = engine_opts.params(seed);
    const ImpulseResponse ir = simulate_rir(c, parse_engine(engine), p);
    write_ir(out, ir);
    out_stream << out << "\n";
    return kExitOk;
  }
};

// ---- sample-rooms ----

struct SampleRoomsCommand {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string engine = "gas";
  std::string out_dir;
  EngineOptions engine_opts;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "Number of rooms")->required();
    app->add_option("--seed", seed, "Dataset seed")->capture_default_str();
    app->add_option("--engine", engine, "image or gas")
        ->check(CLI::IsMember({"image", "gas"}))
        ->capture_default_str();
    app->add_option("--out-dir", out_dir, "Output directory")->required();
    engine_opts.add_to(app);
  }

  int run(std::ostream& out, std::ostream& err) const {
    echo_seed(err, seed);
    const SimulationParams p = engine_opts.params(seed);
    DatasetOptions opts;
    opts.sampler.scattering = engine_opts.scattering;
    opts.sampler.absorption_model = p.absorption_model;
    opts.workers = engine_opts.workers;
    std::mutex mu;
    const std::size_t every = std::max<std::size_t>(1, n / 20);
    opts.progress = [&](std::size_t done, std::size_t total) {
      if (done % every != 0 && done != total) return;
      std::lock_guard<std::mutex> lock(mu);
      err << "[" << done << "/" << total << "]\n";
    };
    SimulationParams item_params = p;
    item_params.trace.workers = 1;
    const Manifest m = generate_dataset(n, seed, parse_engine(engine),
                                        item_params, out_dir, opts);
    err << "generated " << m.generated << ", reused "
        << m.items.size() - m.generated << "\n";
    out << m.path.generic_string() << "\n";
    return kExitOk;
  }
};

// ---- augment ----

struct AugmentCommand {
  std::string speech_list, rir_manifest, noise_list, snr = "0:24",
                                                     channels = "first", out_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void add_to(CLI::App* app) {
    app->add_option("--speech-list", speech_list, "File listing clean utterances")
        ->required();
    app->add_option("--rir-manifest", rir_manifest, "RIR manifest JSON")
        ->required();
    app->add_option("--noise-list", noise_list, "File listing noise recordings")
        ->required();
    app->add_option("--snr", snr, "SNR range LOW:HIGH in dB")
        ->capture_default_str();
    app->add_option("--channels", channels, "first or all")
        ->check(CLI::IsMember({"first", "all"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--out-dir", out_dir, "Output directory")->required();
    app->add_option("--workers", workers, "Worker threads, 0 for all cores")
        ->capture_default_str();
  }

  int run(std::ostream& out, std::ostream& err) const {
    echo_seed(err, seed);
    AugmentSpec spec;
    std::tie(spec.snr_low_db, spec.snr_high_db) = parse_range(snr, "--snr");
    spec.speech = read_path_list(speech_list);
    spec.noise = read_path_list(noise_list);
    if (spec.speech.empty()) throw UsageError("--speech-list: no entries");
    if (spec.noise.empty()) throw UsageError("--noise-list: no entries");
    spec.rir_manifest = rir_manifest;
    spec.first_channel_only = channels == "first";
    spec.seed = seed;
    spec.workers = workers;
    const AugmentReport report = augment_corpus(spec, out_dir);
    for (const AugmentItem& i : report.items) {
      if (!i.error.empty()) {
        err << "failed: " << i.speech << ": " << i.error << "\n";
      }
    }
    err << report.successes() << " written, " << report.failures()
        << " failed\n";
    out << (std::filesystem::path(out_dir) / "report.json").generic_string()
        << "\n";
    return report.failures() == 0 ? kExitOk : kExitRuntime;
  }
};

// ---- analyze ----

struct AnalyzedIr {
  std::size_t index = 0;
  std::string wav;
  ImpulseResponse ir;
  std::vector<ChannelReport> channels;
};

inline nlohmann::json to_json(const AnalyzedIr& a) {
  nlohmann::json ch = nlohmann::json::array();
  for (const ChannelReport& r : a.channels) ch.push_back(to_json(r));
  return {{"index", a.index},
          {"wav", a.wav},
          {"engine", a.ir.metadata().engine},
          {"sample_rate_hz", a.ir.sample_rate()},
          {"channels", ch}};
}

inline std::vector<std::pair<std::size_t, std::filesystem::path>> manifest_irs(
    const Manifest& m) {
  std::vector<std::pair<std::size_t, std::filesystem::path>> out;
  for (const ManifestItem& it : m.items) {
    out.emplace_back(it.index, resolve_item(m, it));
  }
  return out;
}

struct AnalyzeCommand {
  std::vector<std::string> irs;
  std::string manifest, plot_dir, out;
  bool json = false, csv = false;

  void add_to(CLI::App* app) {
    auto* ir_opt = app->add_option("--ir", irs, "IR WAV file(s) with sidecars");
    auto* man_opt =
        app->add_option("--manifest", manifest, "Dataset manifest JSON");
    ir_opt->excludes(man_opt);
    auto* j = app->add_flag("--json", json, "JSON output (default)");
    auto* c = app->add_flag("--csv", csv, "CSV output");
    j->excludes(c);
    app->add_option("--plot", plot_dir, "Directory for EDC plots (SVG)");
    app->add_option("--out", out, "Write the report here instead of stdout");
  }

  int run(std::ostream& out_stream, std::ostream& err) const {
    std::vector<std::pair<std::size_t, std::filesystem::path>> inputs;
    if (!manifest.empty()) {
      inputs = manifest_irs(read_manifest(manifest));
    } else if (!irs.empty()) {
      for (std::size_t i = 0; i < irs.size(); ++i) inputs.emplace_back(i, irs[i]);
    } else {
      throw UsageError("one of --ir or --manifest is required");
    }
    if (!plot_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(plot_dir, ec);
      if (ec) fail(Errc::kIo, "cannot create " + plot_dir);
    }
    std::ostringstream report;
    nlohmann::json items = nlohmann::json::array();
    if (csv) report << kCsvHeader << "\n";
    for (const auto& [index, path] : inputs) {
      AnalyzedIr a{index, path.generic_string(), read_ir(path), {}};
      a.channels = analyze_channels(a.ir, index);
      for (const ChannelReport& r : a.channels) {
        if (!r.t60_error.empty()) {
          err << "warning: " << a.wav << " channel " << r.channel << ": "
              << r.t60_error << "\n";
        }
        if (csv) report << csv_row(r) << "\n";
      }
      if (!plot_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "edc_%05zu.svg", index);
        write_text_atomic(std::filesystem::path(plot_dir) / name,
                          edc_svg(a.channels, path.filename().string()));
      }
      if (!csv) items.push_back(to_json(a));
    }
    if (!csv) {
      report << nlohmann::json{{"count", items.size()}, {"irs", items}}.dump(2)
             << "\n";
    }
    if (out.empty()) {
      out_stream << report.str();
    } else {
      write_text_atomic(out, report.str());
    }
    return kExitOk;
  }
};

// ---- compare ----

struct IrSummary {
  std::optional<double> t60_s;  // mean over channels with a valid fit
  double drr_db = 0.0;          // mean over channels
  double late_share = 0.0;      // mean over channels
};

inline IrSummary summarize(const std::vector<ChannelReport>& channels) {
  IrSummary s;
  double t60_sum = 0.0;
  std::size_t t60_n = 0;
  for (const ChannelReport& r : channels) {
    if (r.t60_s) {
      t60_sum += *r.t60_s;
      ++t60_n;
    }
    s.drr_db += r.drr_db;
    s.late_share += r.energy.late_share();
  }
  if (t60_n > 0) s.t60_s = t60_sum / static_cast<double>(t60_n);
  const auto n = static_cast<double>(channels.size());
  s.drr_db /= n;
  s.late_share /= n;
  return s;
}

// b - a; equal values (including equal infinities) give exactly 0.
inline std::optional<double> delta(std::optional<double> a,
                                   std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  if (*a == *b) return 0.0;
  const double d = *b - *a;
  if (std::isnan(d)) return std::nullopt;
  return d;
}

inline nlohmann::json optional_number(std::optional<double> v) {
  return v ? json_number(*v) : nlohmann::json(nullptr);
}

inline void check_paired(const Manifest& a, const Manifest& b) {
  if (a.items.size() != b.items.size()) {
    throw PairingError("manifests hold " + std::to_string(a.items.size()) +
                       " and " + std::to_string(b.items.size()) + " items");
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (a.items[i].index != b.items[i].index ||
        !same_geometry(a.items[i].config, b.items[i].config)) {
      throw PairingError("item " + std::to_string(i) +
                         " differs in index or room geometry");
    }
  }
}

// Per-pair deltas (b minus a) of T60, DRR and late-energy share.
inline nlohmann::json compare_manifests(const Manifest& a, const Manifest& b) {
  check_paired(a, b);
  nlohmann::json pairs = nlohmann::json::array();
  double sums[3] = {0.0, 0.0, 0.0};
  std::size_t counts[3] = {0, 0, 0};
  std::size_t late_b_greater = 0;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const ImpulseResponse ira = read_ir(resolve_item(a, a.items[i]));
    const ImpulseResponse irb = read_ir(resolve_item(b, b.items[i]));
    const IrSummary sa = summarize(analyze_channels(ira, a.items[i].index));
    const IrSummary sb = summarize(analyze_channels(irb, b.items[i].index));
    const std::optional<double> d[3] = {delta(sa.t60_s, sb.t60_s),
                                        delta(sa.drr_db, sb.drr_db),
                                        delta(sa.late_share, sb.late_share)};
    for (int k = 0; k < 3; ++k) {
      if (d[k] && std::isfinite(*d[k])) {
        sums[k] += *d[k];
        ++counts[k];
      }
    }
    if (sb.late_share > sa.late_share) ++late_b_greater;
    pairs.push_back({{"index", a.items[i].index},
                     {"t60_a_s", optional_number(sa.t60_s)},
                     {"t60_b_s", optional_number(sb.t60_s)},
                     {"drr_a_db", json_number(sa.drr_db)},
                     {"drr_b_db", json_number(sb.drr_db)},
                     {"late_share_a", sa.late_share},
                     {"late_share_b", sb.late_share},
                     {"delta_t60_s", optional_number(d[0])},
                     {"delta_drr_db", optional_number(d[1])},
                     {"delta_late_share", optional_number(d[2])}});
  }
  auto mean = [&](int k) {
    return counts[k] > 0
               ? nlohmann::json(sums[k] / static_cast<double>(counts[k]))
               : nlohmann::json(nullptr);
  };
  const std::size_t n = a.items.size();
  return {{"engine_a", a.engine},
          {"engine_b", b.engine},
          {"count", n},
          {"pairs", pairs},
          {"summary",
           {{"mean_delta_t60_s", mean(0)},
            {"mean_delta_drr_db", mean(1)},
            {"mean_delta_late_share", mean(2)},
            {"late_share_b_greater_fraction",
             n > 0 ? static_cast<double>(late_b_greater) /
                         static_cast<double>(n)
                   : 0.0}}}};
}

struct CompareCommand {
  std::string manifest_a, manifest_b;
  bool json = false;

  void add_to(CLI::App* app) {
    app->add_option("--manifest-a", manifest_a, "First manifest")->required();
    app->add_option("--manifest-b", manifest_b, "Second manifest")->required();
    app->add_flag("--json", json, "JSON output");
  }

  int run(std::ostream& out, std::ostream& err) const {
    nlohmann::json r;
    try {
      r = compare_manifests(read_manifest(manifest_a), read_manifest(manifest_b));
    } catch (const PairingError& e) {
      err << "error: manifests are not paired: " << e.what() << "\n";
      return kExitPairing;
    }
    if (json) {
      out << r.dump(2) << "\n";
      return kExitOk;
    }
    auto text = [](const nlohmann::json& v) {
      if (v.is_null()) return std::string("n/a");
      if (v.is_string()) return v.get<std::string>();
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", v.get<double>());
      return std::string(buf);
    };
    out << "index  d_t60_s  d_drr_db  d_late_share   (" << r["engine_b"].get<std::string>()
        << " - " << r["engine_a"].get<std::string>() << ")\n";
    for (const auto& p : r["pairs"]) {
      out << p["index"].get<std::size_t>() << "  " << text(p["delta_t60_s"])
          << "  " << text(p["delta_drr_db"]) << "  "
          << text(p["delta_late_share"]) << "\n";
    }
    const auto& s = r["summary"];
    out << "mean  " << text(s["mean_delta_t60_s"]) << "  "
        << text(s["mean_delta_drr_db"]) << "  "
        << text(s["mean_delta_late_share"]) << "\n";
    out << "late share higher in b: " << text(s["late_share_b_greater_fraction"])
        << "\n";
    return kExitOk;
  }
};

// args excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Geometric room impulse response simulation and analysis",
               "roomsim"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "roomsim 0.1.0");

  SimulateCommand simulate;
  SampleRoomsCommand sample_rooms;
  AugmentCommand augment;
  AnalyzeCommand analyze;
  CompareCommand compare;
  simulate.add_to(
      app.add_subcommand("simulate", "Simulate one multichannel IR"));
  sample_rooms.add_to(app.add_subcommand(
      "sample-rooms", "Simulate a dataset of randomly sampled rooms"));
  augment.add_to(app.add_subcommand(
      "augment", "Reverberate and add noise to a speech corpus"));
  analyze.add_to(app.add_subcommand(
      "analyze", "T60, DRR and energy decomposition of IRs"));
  compare.add_to(
      app.add_subcommand("compare", "Compare two paired IR datasets"));
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->footer("  --config FILE               JSON or TOML file of option values; "
                "later flags override it");
  }

  try {
    args = detail::expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("simulate")) return simulate.run(out, err);
    if (app.got_subcommand("sample-rooms")) return sample_rooms.run(out, err);
    if (app.got_subcommand("augment")) return augment.run(out, err);
    if (app.got_subcommand("analyze")) return analyze.run(out, err);
    return compare.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cout, std::cerr);
}

}  // namespace roomsim::cli
