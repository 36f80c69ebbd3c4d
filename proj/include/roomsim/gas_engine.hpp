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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/error.hpp"
#include "roomsim/fft.hpp"
#include "roomsim/geometry.hpp"
#include "roomsim/impulse_response.hpp"
#include "roomsim/material.hpp"
#include "roomsim/parallel.hpp"
#include "roomsim/rng.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

struct TraceParams {
  std::size_t n_rays = 100000;
  std::size_t max_bounces = 200;
  // Rays stop once their energy falls below energy_cutoff * E0 / n_rays.
  double energy_cutoff = 1e-6;
  double receiver_radius = 0.0875;
  double fs = 16000.0;
  double ir_length = 0.6;
  std::size_t n_bands = 1;
  std::uint64_t seed = 0;
  // Let rays find the receivers on their first segment instead of adding the
  // analytic direct term. Used to validate the estimator itself.
  bool stochastic_direct = false;
  // Jittered stratification of the initial directions over (cos theta, phi).
  bool stratified = true;
  std::size_t workers = 1;

  void validate() const {
    require(n_rays >= 1, "n_rays must be at least 1");
    require(receiver_radius > 0.0 && receiver_radius <= 0.25,
            "receiver_radius must lie in (0, 0.25] m");
    require(energy_cutoff >= 0.0 && energy_cutoff < 1.0,
            "energy_cutoff must lie in [0, 1)");
    require(fs > 0.0, "sample rate must be positive");
    require(ir_length > 0.0, "IR length must be positive");
    require(n_bands == 1 || n_bands == kOctaveCentersHz.size(),
            "n_bands must be 1 or " + std::to_string(kOctaveCentersHz.size()));
  }

  std::size_t n_bins() const {
    return static_cast<std::size_t>(std::ceil(ir_length * fs));
  }
};

inline nlohmann::json to_json(const TraceParams& p) {
  return {{"n_rays", p.n_rays},
          {"max_bounces", p.max_bounces},
          {"energy_cutoff", p.energy_cutoff},
          {"receiver_radius_m", p.receiver_radius},
          {"sample_rate_hz", p.fs},
          {"ir_length_s", p.ir_length},
          {"n_bands", p.n_bands},
          {"seed", p.seed},
          {"stochastic_direct", p.stochastic_direct},
          {"stratified", p.stratified}};
}

// Received energy per receiver, band and time bin (bin width 1/fs).
class EnergyHistogram {
 public:
  EnergyHistogram() = default;
  EnergyHistogram(std::size_t n_receivers, std::size_t n_bands,
                  std::size_t n_bins, double sample_rate)
      : n_receivers_(n_receivers),
        n_bands_(n_bands),
        n_bins_(n_bins),
        sample_rate_(sample_rate),
        data_(n_receivers * n_bands * n_bins, 0.0) {}

  std::size_t n_receivers() const { return n_receivers_; }
  std::size_t n_bands() const { return n_bands_; }
  std::size_t n_bins() const { return n_bins_; }
  double sample_rate() const { return sample_rate_; }

  double& at(std::size_t receiver, std::size_t band, std::size_t bin) {
    return data_[(receiver * n_bands_ + band) * n_bins_ + bin];
  }
  double at(std::size_t receiver, std::size_t band, std::size_t bin) const {
    return data_[(receiver * n_bands_ + band) * n_bins_ + bin];
  }
  std::span<const double> bins(std::size_t receiver,
                               std::size_t band = 0) const {
    return {data_.data() + (receiver * n_bands_ + band) * n_bins_, n_bins_};
  }
  const std::vector<double>& raw() const { return data_; }

  friend bool operator==(const EnergyHistogram&,
                         const EnergyHistogram&) = default;

 private:
  std::size_t n_receivers_ = 0;
  std::size_t n_bands_ = 0;
  std::size_t n_bins_ = 0;
  double sample_rate_ = 0.0;
  std::vector<double> data_;
};

// Energy bookkeeping of a trace, per band, in units of E0 = 1.
struct TraceStats {
  std::vector<double> emitted;
  // Sum of ray energy over all stochastic receiver crossings (histogram
  // mass times the sphere cross-section), analytic direct term excluded.
  std::vector<double> deposited;
  std::vector<double> absorbed;
  std::size_t crossings = 0;
};

struct TraceResult {
  EnergyHistogram histogram;
  TraceStats stats;
};

namespace detail {

inline constexpr std::size_t kRaysPerChunk = 4096;
inline constexpr std::size_t kChunksPerWave = 64;
inline constexpr std::uint64_t kRayStream = 0x7261790000000001ULL;
inline constexpr std::uint64_t kSignStream = 0x7369676e00000002ULL;
inline constexpr std::uint64_t kCarrierStream = 0x6361727200000003ULL;

struct Deposit {
  std::uint32_t receiver;
  std::uint32_t band;
  std::uint32_t bin;
  double energy;
};

struct ChunkOutput {
  std::vector<Deposit> deposits;
  std::vector<double> deposited;
  std::vector<double> absorbed;
  std::size_t crossings = 0;
};

class RayTracer {
 public:
  RayTracer(const Scene& scene, const Vec3& source,
            const std::vector<Vec3>& receivers, const TraceParams& params)
      : scene_(scene),
        source_(source),
        receivers_(receivers),
        params_(params),
        n_bins_(params.n_bins()),
        bands_(params.n_bands),
        r2_(params.receiver_radius * params.receiver_radius),
        inv_area_(1.0 / (kPi * r2_)),
        ray_energy_(1.0 / static_cast<double>(params.n_rays)),
        cutoff_(params.energy_cutoff * ray_energy_),
        strata_(static_cast<std::size_t>(
            std::floor(std::sqrt(static_cast<double>(params.n_rays))))) {
    // Per-material absorption / scattering spread over the traced bands.
    for (const Material& m : scene.materials()) {
      require(m.n_bands() == 1 || m.n_bands() == bands_,
              "scene materials have " + std::to_string(m.n_bands()) +
                  " bands but the trace uses " + std::to_string(bands_));
      MaterialBands mb;
      for (std::size_t b = 0; b < bands_; ++b) {
        const std::size_t src = m.n_bands() == 1 ? 0 : b;
        mb.reflect.push_back(1.0 - m.absorption(src));
        mb.scatter.push_back(m.scattering(src));
      }
      mb.mean_scatter = 0.0;
      for (double s : mb.scatter) mb.mean_scatter += s;
      mb.mean_scatter /= static_cast<double>(bands_);
      mb.uniform_scatter = std::all_of(
          mb.scatter.begin(), mb.scatter.end(),
          [&](double s) { return s == mb.scatter.front(); });
      materials_.push_back(std::move(mb));
    }
  }

  void trace_chunk(std::size_t first_ray, std::size_t last_ray,
                   ChunkOutput& out) const {
    out.deposited.assign(bands_, 0.0);
    out.absorbed.assign(bands_, 0.0);
    std::vector<double> energy(bands_);
    for (std::size_t ray = first_ray; ray < last_ray; ++ray) {
      trace_ray(ray, energy, out);
    }
  }

 private:
  struct MaterialBands {
    std::vector<double> reflect;
    std::vector<double> scatter;
    double mean_scatter = 0.0;
    bool uniform_scatter = true;
  };

  Vec3 initial_direction(std::size_t ray, RandomStream& rng) const {
    const double j1 = rng.uniform();
    const double j2 = rng.uniform();
    if (params_.stratified && ray < strata_ * strata_) {
      const double k = static_cast<double>(strata_);
      const double a = static_cast<double>(ray / strata_);
      const double b = static_cast<double>(ray % strata_);
      return sphere_direction((a + j1) / k, (b + j2) / k);
    }
    return sphere_direction(j1, j2);
  }

  void deposit_segment(const Vec3& origin, const Vec3& dir, double seg_len,
                       double path, const std::vector<double>& energy,
                       ChunkOutput& out) const {
    for (std::size_t r = 0; r < receivers_.size(); ++r) {
      const Vec3 oc = origin - receivers_[r];
      const double b = dot(oc, dir);
      const double disc = b * b - (dot(oc, oc) - r2_);
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      if (-b + sq <= 0.0 || -b - sq >= seg_len) continue;
      const double closest = std::clamp(-b, 0.0, seg_len);
      const double t = (path + closest) / kSpeedOfSound * params_.fs;
      const auto bin = static_cast<std::size_t>(std::llround(t));
      if (bin >= n_bins_) continue;
      ++out.crossings;
      for (std::size_t band = 0; band < bands_; ++band) {
        if (energy[band] <= 0.0) continue;
        out.deposits.push_back({static_cast<std::uint32_t>(r),
                                static_cast<std::uint32_t>(band),
                                static_cast<std::uint32_t>(bin),
                                energy[band] * inv_area_});
        out.deposited[band] += energy[band];
      }
    }
  }

  void trace_ray(std::size_t ray, std::vector<double>& energy,
                 ChunkOutput& out) const {
    RandomStream rng(params_.seed, {kRayStream, ray});
    Vec3 origin = source_;
    Vec3 dir = initial_direction(ray, rng);
    std::fill(energy.begin(), energy.end(), ray_energy_);
    double path = 0.0;
    const double horizon =
        (static_cast<double>(n_bins_) + 0.5) * kSpeedOfSound / params_.fs;
    for (std::size_t bounce = 0;; ++bounce) {
      const auto hit = scene_.intersect({origin, dir});
      const double seg_len =
          hit ? hit->distance : std::numeric_limits<double>::infinity();
      if (bounce > 0 || params_.stochastic_direct) {
        deposit_segment(origin, dir, seg_len, path, energy, out);
      }
      if (!hit || bounce == params_.max_bounces) break;
      path += seg_len;
      if (path >= horizon) break;

      const MaterialBands& m =
          materials_[scene_.triangles()[hit->triangle_index].material_id];
      double peak = 0.0;
      for (std::size_t b = 0; b < bands_; ++b) {
        const double kept = energy[b] * m.reflect[b];
        out.absorbed[b] += energy[b] - kept;
        energy[b] = kept;
      }
      const bool diffuse = rng.uniform() < m.mean_scatter;
      if (!m.uniform_scatter) {
        // Reweight so each band's expected diffuse share is its own s.
        for (std::size_t b = 0; b < bands_; ++b) {
          energy[b] *= diffuse ? m.scatter[b] / m.mean_scatter
                               : (1.0 - m.scatter[b]) / (1.0 - m.mean_scatter);
        }
      }
      for (double e : energy) peak = std::max(peak, e);
      if (peak <= 0.0 || peak < cutoff_) break;
      if (diffuse) {
        dir = sample_lambert(hit->normal, rng);
      } else {
        dir = dir - hit->normal * (2.0 * dot(dir, hit->normal));
      }
      origin = hit->point;
    }
  }

  const Scene& scene_;
  Vec3 source_;
  const std::vector<Vec3>& receivers_;
  const TraceParams& params_;
  std::size_t n_bins_;
  std::size_t bands_;
  double r2_;
  double inv_area_;
  double ray_energy_;
  double cutoff_;
  std::size_t strata_;
  std::vector<MaterialBands> materials_;
};

}  // namespace detail

// Monte Carlo path tracing from the source. Each ray carries 1/M of the
// unit source energy per band; at a hit it keeps (1 - alpha) and continues
// diffusely (Lambert) with probability s, else specularly. Receiver spheres
// crossed after the first bounce receive energy / (pi r^2) at the
// closest-approach time. The direct path is added analytically as
// 1 / (4 pi d^2) when the receiver is visible. Results are bit-identical
// for any worker count: rays are processed in fixed chunks whose deposits
// are reduced in ray order.
inline TraceResult trace_with_stats(const Scene& scene, const Vec3& source,
                                    const std::vector<Vec3>& receivers,
                                    const TraceParams& params) {
  params.validate();
  require(!receivers.empty(), "at least one receiver is required");
  require(scene.is_interior(source), "source must lie inside the scene");
  for (std::size_t r = 0; r < receivers.size(); ++r) {
    require(scene.is_interior(receivers[r]),
            "receiver " + std::to_string(r) + " must lie inside the scene");
    if (distance(source, receivers[r]) <= params.receiver_radius) {
      fail(Errc::kDegenerateGeometry,
           "receiver sphere " + std::to_string(r) + " contains the source");
    }
  }
  const std::size_t bands = params.n_bands;
  TraceResult result{EnergyHistogram(receivers.size(), bands, params.n_bins(),
                                     params.fs),
                     TraceStats{std::vector<double>(bands, 1.0),
                                std::vector<double>(bands, 0.0),
                                std::vector<double>(bands, 0.0), 0}};
  EnergyHistogram& hist = result.histogram;

  if (!params.stochastic_direct) {
    for (std::size_t r = 0; r < receivers.size(); ++r) {
      if (scene.occluded(source, receivers[r])) continue;
      const double d = distance(source, receivers[r]);
      const auto bin = static_cast<std::size_t>(
          std::llround(d / kSpeedOfSound * params.fs));
      if (bin >= hist.n_bins()) continue;
      for (std::size_t b = 0; b < bands; ++b) {
        hist.at(r, b, bin) += 1.0 / (4.0 * kPi * d * d);
      }
    }
  }

  const detail::RayTracer tracer(scene, source, receivers, params);
  const std::size_t n_chunks =
      (params.n_rays + detail::kRaysPerChunk - 1) / detail::kRaysPerChunk;
  std::vector<detail::ChunkOutput> wave(detail::kChunksPerWave);
  for (std::size_t first = 0; first < n_chunks;
       first += detail::kChunksPerWave) {
    const std::size_t count =
        std::min(detail::kChunksPerWave, n_chunks - first);
    parallel_for(count, params.workers, [&](std::size_t i) {
      const std::size_t chunk = first + i;
      const std::size_t begin = chunk * detail::kRaysPerChunk;
      const std::size_t end =
          std::min(params.n_rays, begin + detail::kRaysPerChunk);
      wave[i].deposits.clear();
      wave[i].crossings = 0;
      tracer.trace_chunk(begin, end, wave[i]);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const detail::ChunkOutput& c = wave[i];
      for (const detail::Deposit& d : c.deposits) {
        hist.at(d.receiver, d.band, d.bin) += d.energy;
      }
      for (std::size_t b = 0; b < bands; ++b) {
        result.stats.deposited[b] += c.deposited[b];
        result.stats.absorbed[b] += c.absorbed[b];
      }
      result.stats.crossings += c.crossings;
    }
  }
  return result;
}

inline EnergyHistogram trace(const Scene& scene, const Vec3& source,
                             const std::vector<Vec3>& receivers,
                             const TraceParams& params) {
  return trace_with_stats(scene, source, receivers, params).histogram;
}

namespace detail {

// Unit-power noise limited to octave band `band` (first band extends to
// DC, last band to Nyquist).
inline std::vector<double> band_carrier(std::size_t length, double fs,
                                        std::size_t band, std::uint64_t seed,
                                        std::size_t receiver) {
  const std::size_t n = next_pow2(std::max<std::size_t>(length, 2));
  RealFft fft(n);
  RandomStream rng(seed, {kCarrierStream, receiver, band});
  for (double& v : fft.time()) v = rng.normal();
  fft.forward();
  const double fc = kOctaveCentersHz[band];
  const double lo = band == 0 ? 0.0 : fc / std::sqrt(2.0);
  const double hi = band + 1 == kOctaveCentersHz.size()
                        ? std::numeric_limits<double>::infinity()
                        : fc * std::sqrt(2.0);
  auto spec = fft.freq();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f >= hi) spec[k] = 0.0;
  }
  fft.inverse();
  std::vector<double> out(fft.time().begin(), fft.time().begin() +
                                                  static_cast<std::ptrdiff_t>(length));
  double power = 0.0;
  for (double v : out) power += v * v;
  power /= static_cast<double>(length);
  const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace detail

// Pressure IR from an energy histogram. Broadband: p[n] = sign[n] sqrt(E[n])
// with signs drawn from a stream keyed by (seed, receiver), so sum p^2 equals
// sum E. Multi-band: each band's unit-power noise carrier is weighted by
// sqrt(E_band[n]) and the bands are summed.
inline ImpulseResponse histogram_to_ir(const EnergyHistogram& hist,
                                       const TraceParams& params) {
  require(hist.n_bins() == params.n_bins(),
          "histogram bin count does not match ir_length * fs");
  std::vector<std::vector<double>> channels(
      hist.n_receivers(), std::vector<double>(hist.n_bins(), 0.0));
  for (std::size_t r = 0; r < hist.n_receivers(); ++r) {
    auto& out = channels[r];
    if (hist.n_bands() == 1) {
      RandomStream rng(params.seed, {detail::kSignStream, r});
      const auto e = hist.bins(r, 0);
      for (std::size_t n = 0; n < out.size(); ++n) {
        const double sign = rng.sign();
        out[n] = sign * std::sqrt(e[n]);
      }
    } else {
      for (std::size_t b = 0; b < hist.n_bands(); ++b) {
        const auto carrier = detail::band_carrier(out.size(), params.fs, b,
                                                  params.seed, r);
        const auto e = hist.bins(r, b);
        for (std::size_t n = 0; n < out.size(); ++n) {
          out[n] += carrier[n] * std::sqrt(e[n]);
        }
      }
    }
  }
  IrMetadata meta;
  meta.engine = "gas";
  meta.seed = params.seed;
  meta.extra["trace_params"] = to_json(params);
  return ImpulseResponse(std::move(channels), params.fs, std::move(meta));
}

}  // namespace roomsim
