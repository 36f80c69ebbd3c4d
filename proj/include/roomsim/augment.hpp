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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/dataset.hpp"
#include "roomsim/error.hpp"
#include "roomsim/fft.hpp"
#include "roomsim/impulse_response.hpp"
#include "roomsim/ir_io.hpp"
#include "roomsim/parallel.hpp"
#include "roomsim/rng.hpp"
#include "roomsim/wav.hpp"

namespace roomsim {

struct AudioBuffer {
  std::vector<std::vector<double>> channels;
  double sample_rate = 0.0;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

inline double mean_square(const AudioBuffer& a) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& ch : a.channels) {
    for (double v : ch) acc += v * v;
    n += ch.size();
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

// Full linear convolution of a mono signal with every IR channel, by
// overlap-add with a fixed FFT size (power of two >= 4x the IR length).
// Output length is len(signal) + len(ir) - 1.
inline AudioBuffer convolve(const AudioBuffer& speech,
                            const ImpulseResponse& ir) {
  require(speech.n_channels() == 1, "convolve expects a mono signal");
  require(speech.length() > 0, "convolve needs a non-empty signal");
  if (speech.sample_rate != ir.sample_rate()) {
    fail(Errc::kRateMismatch,
         "sample-rate mismatch: signal " + std::to_string(speech.sample_rate) +
             " Hz vs IR " + std::to_string(ir.sample_rate()) + " Hz");
  }
  const std::vector<double>& x = speech.channels.front();
  const std::size_t ir_len = ir.length();
  const std::size_t n_fft = next_pow2(4 * ir_len);
  const std::size_t block = n_fft - ir_len + 1;
  const std::size_t out_len = x.size() + ir_len - 1;
  RealFft fft(n_fft);
  const double inv_n = 1.0 / static_cast<double>(n_fft);

  AudioBuffer out;
  out.sample_rate = speech.sample_rate;
  out.channels.assign(ir.n_channels(), std::vector<double>(out_len, 0.0));
  std::vector<std::complex<double>> h_spec(fft.bins());
  std::vector<std::complex<double>> x_spec(fft.bins());
  for (std::size_t c = 0; c < ir.n_channels(); ++c) {
    const std::vector<double>& h = ir.channel(c);
    auto t = fft.time();
    std::fill(t.begin(), t.end(), 0.0);
    std::copy(h.begin(), h.end(), t.begin());
    fft.forward();
    std::copy(fft.freq().begin(), fft.freq().end(), h_spec.begin());
    std::vector<double>& y = out.channels[c];
    for (std::size_t start = 0; start < x.size(); start += block) {
      const std::size_t len = std::min(block, x.size() - start);
      std::fill(t.begin(), t.end(), 0.0);
      std::copy(x.begin() + static_cast<std::ptrdiff_t>(start),
                x.begin() + static_cast<std::ptrdiff_t>(start + len),
                t.begin());
      fft.forward();
      auto f = fft.freq();
      for (std::size_t k = 0; k < f.size(); ++k) f[k] *= h_spec[k];
      fft.inverse();
      const std::size_t valid = std::min(len + ir_len - 1, out_len - start);
      for (std::size_t i = 0; i < valid; ++i) y[start + i] += t[i] * inv_n;
    }
  }
  return out;
}

struct MixResult {
  AudioBuffer mixed;
  // Unscaled components: mixed = scale * (wet + noise_gain * noise).
  AudioBuffer noise;
  double noise_gain = 1.0;
  double scale = 1.0;
  std::size_t noise_offset = 0;
};

inline constexpr double kPeakTarget = 0.9;

// Adds noise at `snr_db` relative to the mean-square power of the whole wet
// signal. The noise is cropped at a random offset (looped when shorter than
// the signal). If the sum would clip, everything is scaled to a 0.9 peak and
// the scale is reported.
inline MixResult mix_noise(const AudioBuffer& wet, const AudioBuffer& noise,
                           double snr_db, RandomStream& rng) {
  require(wet.length() > 0, "wet signal is empty");
  require(noise.length() > 0 && noise.n_channels() > 0, "noise is empty");
  if (wet.sample_rate != noise.sample_rate) {
    fail(Errc::kRateMismatch,
         "sample-rate mismatch: signal " + std::to_string(wet.sample_rate) +
             " Hz vs noise " + std::to_string(noise.sample_rate) + " Hz");
  }
  const double p_signal = mean_square(wet);
  if (p_signal <= 0.0) fail(Errc::kSilentSignal, "wet signal is silent");

  MixResult r;
  const std::size_t len = wet.length();
  const std::size_t n_len = noise.length();
  r.noise_offset = n_len >= len ? static_cast<std::size_t>(
                                      rng.index(n_len - len + 1))
                                : static_cast<std::size_t>(rng.index(n_len));
  r.noise.sample_rate = wet.sample_rate;
  r.noise.channels.assign(wet.n_channels(), std::vector<double>(len));
  for (std::size_t c = 0; c < wet.n_channels(); ++c) {
    const auto& src = noise.channels[c % noise.n_channels()];
    for (std::size_t i = 0; i < len; ++i) {
      r.noise.channels[c][i] = src[(r.noise_offset + i) % n_len];
    }
  }
  const double p_noise = mean_square(r.noise);
  if (p_noise <= 0.0) fail(Errc::kSilentSignal, "noise segment is silent");
  r.noise_gain = std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));

  r.mixed.sample_rate = wet.sample_rate;
  r.mixed.channels.assign(wet.n_channels(), std::vector<double>(len));
  double peak = 0.0;
  for (std::size_t c = 0; c < wet.n_channels(); ++c) {
    for (std::size_t i = 0; i < len; ++i) {
      const double v = wet.channels[c][i] + r.noise_gain * r.noise.channels[c][i];
      r.mixed.channels[c][i] = v;
      peak = std::max(peak, std::abs(v));
    }
  }
  if (peak > 1.0) {
    r.scale = kPeakTarget / peak;
    for (auto& ch : r.mixed.channels) {
      for (double& v : ch) v *= r.scale;
    }
  }
  return r;
}

struct AugmentSpec {
  std::vector<std::filesystem::path> speech;
  std::filesystem::path rir_manifest;
  std::vector<std::filesystem::path> noise;
  double snr_low_db = 0.0;
  double snr_high_db = 24.0;
  bool first_channel_only = true;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Newline-delimited path list; blank lines and '#' comments are skipped.
// Relative entries are resolved against the list's directory.
inline std::vector<std::filesystem::path> read_path_list(
    const std::filesystem::path& list) {
  std::ifstream is(list);
  if (!is) fail(Errc::kIo, "cannot open " + list.string());
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    std::filesystem::path p(line);
    if (p.is_relative()) p = list.parent_path() / p;
    out.push_back(p);
  }
  return out;
}

struct UtteranceDraw {
  std::size_t rir_index = 0;
  std::size_t noise_index = 0;
  double snr_db = 0.0;
};

// Per-utterance choices; the same stream then feeds the noise crop.
inline UtteranceDraw draw_utterance(RandomStream& rng, std::size_t n_rirs,
                                    std::size_t n_noises, double snr_low,
                                    double snr_high) {
  UtteranceDraw d;
  d.rir_index = static_cast<std::size_t>(rng.index(n_rirs));
  d.noise_index = static_cast<std::size_t>(rng.index(n_noises));
  d.snr_db = rng.uniform(snr_low, snr_high);
  return d;
}

inline RandomStream utterance_stream(std::uint64_t seed, std::size_t index) {
  return RandomStream(seed, {0x6175676d00000000ULL, index});
}

struct AugmentItem {
  std::size_t index = 0;
  std::string speech;
  std::string output;
  std::size_t rir_index = 0;
  std::string rir;
  std::string noise;
  double snr_db = 0.0;
  double noise_gain = 0.0;
  double scale = 1.0;
  std::size_t noise_offset = 0;
  std::string error;  // non-empty on failure
};

struct AugmentReport {
  std::uint64_t seed = 0;
  std::vector<AugmentItem> items;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(
        items.begin(), items.end(),
        [](const AugmentItem& i) { return !i.error.empty(); }));
  }
  std::size_t successes() const { return items.size() - failures(); }
};

inline nlohmann::json to_json(const AugmentReport& r) {
  nlohmann::json items = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (const AugmentItem& i : r.items) {
    if (!i.error.empty()) {
      failures.push_back(
          {{"index", i.index}, {"speech", i.speech}, {"error", i.error}});
      continue;
    }
    items.push_back({{"index", i.index},
                     {"speech", i.speech},
                     {"output", i.output},
                     {"rir_index", i.rir_index},
                     {"rir", i.rir},
                     {"noise", i.noise},
                     {"snr_db", i.snr_db},
                     {"noise_gain", i.noise_gain},
                     {"scale", i.scale},
                     {"noise_offset", i.noise_offset}});
  }
  return {{"seed", r.seed},
          {"total", r.items.size()},
          {"succeeded", r.successes()},
          {"failed", r.failures()},
          {"items", items},
          {"failures", failures}};
}

inline AudioBuffer load_audio(const std::filesystem::path& path) {
  WavData w = read_wav(path);
  return {std::move(w.channels), w.sample_rate};
}

// Reverberates and noises every utterance: RIR, noise file and SNR are
// drawn from a stream keyed by (seed, utterance index), so the outputs do
// not depend on the worker count. Failures are recorded per item and the
// rest of the corpus continues. Writes aug_<index>.wav files and
// report.json to out_dir.
inline AugmentReport augment_corpus(const AugmentSpec& spec,
                                    const std::filesystem::path& out_dir) {
  require(!spec.speech.empty(), "speech list is empty");
  require(!spec.noise.empty(), "noise list is empty");
  require(spec.snr_low_db <= spec.snr_high_db,
          "SNR range must satisfy low <= high");
  const Manifest rirs = read_manifest(spec.rir_manifest);
  require(!rirs.items.empty(), "RIR manifest is empty");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::kIo, "cannot create " + out_dir.string());

  AugmentReport report;
  report.seed = spec.seed;
  report.items.resize(spec.speech.size());
  parallel_for(spec.speech.size(), spec.workers, [&](std::size_t i) {
    AugmentItem& item = report.items[i];
    item.index = i;
    item.speech = spec.speech[i].generic_string();
    RandomStream rng = utterance_stream(spec.seed, i);
    const UtteranceDraw draw =
        draw_utterance(rng, rirs.items.size(), spec.noise.size(),
                       spec.snr_low_db, spec.snr_high_db);
    item.rir_index = rirs.items[draw.rir_index].index;
    item.rir = resolve_item(rirs, rirs.items[draw.rir_index]).generic_string();
    item.noise = spec.noise[draw.noise_index].generic_string();
    item.snr_db = draw.snr_db;
    char name[32];
    std::snprintf(name, sizeof(name), "aug_%05zu.wav", i);
    const std::filesystem::path out_path = out_dir / name;
    try {
      AudioBuffer speech = load_audio(spec.speech[i]);
      if (speech.n_channels() > 1) speech.channels.resize(1);
      const ImpulseResponse ir = read_ir(item.rir);
      AudioBuffer wet = convolve(speech, ir);
      if (spec.first_channel_only) wet.channels.resize(1);
      const AudioBuffer noise = load_audio(spec.noise[draw.noise_index]);
      const MixResult mix = mix_noise(wet, noise, draw.snr_db, rng);
      item.noise_gain = mix.noise_gain;
      item.scale = mix.scale;
      item.noise_offset = mix.noise_offset;
      write_wav(out_path, mix.mixed.channels, mix.mixed.sample_rate);
      item.output = out_path.generic_string();
    } catch (const std::exception& e) {
      std::filesystem::remove(out_path, ec);
      item.error = e.what();
    }
  });
  write_text_atomic(out_dir / "report.json", to_json(report).dump(2) + "\n");
  return report;
}

}  // namespace roomsim
