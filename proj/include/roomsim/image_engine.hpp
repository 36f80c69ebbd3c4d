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
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roomsim/error.hpp"
#include "roomsim/geometry.hpp"
#include "roomsim/impulse_response.hpp"
#include "roomsim/parallel.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

struct ImageSource {
  Vec3 position;
  int order = 0;
  // Product of sqrt(1 - alpha) over the bounces.
  double gain = 1.0;
  // Generic mode: reflecting surface ids, first bounce first. Empty for
  // shoebox lattice images.
  std::vector<std::size_t> surfaces;
};

// One planar reflector of a generic scene: all triangles sharing a
// surface id.
struct Surface {
  Vec3 point;
  Vec3 normal;
  double absorption = 0.0;
  std::vector<std::size_t> triangles;
};

inline std::vector<Surface> scene_surfaces(const Scene& scene) {
  std::vector<Surface> out(scene.surface_count());
  for (std::size_t i = 0; i < scene.triangles().size(); ++i) {
    const Triangle& t = scene.triangles()[i];
    Surface& s = out[t.surface_id];
    if (s.triangles.empty()) {
      s.point = t.vertices[0];
      s.normal = t.normal();
      s.absorption = scene.material_of(i).mean_absorption();
    }
    s.triangles.push_back(i);
  }
  return out;
}

inline Vec3 mirror_across(const Vec3& p, const Vec3& plane_point,
                          const Vec3& plane_normal) {
  return p - plane_normal * (2.0 * dot(p - plane_point, plane_normal));
}

// Allen-Berkley lattice of a [0,L] box. wall_absorption is ordered
// x=0, x=Lx, y=0, y=Ly, z=0, z=Lz. Includes the order-0 source. Images whose
// gain is exactly zero (a bounce on a fully absorbing wall) are omitted.
inline std::vector<ImageSource> enumerate_images_shoebox(
    const Vec3& dims, const Vec3& source, int max_order,
    const std::array<double, 6>& wall_absorption = {}) {
  require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
          "room dimensions must be positive");
  require(max_order >= 0, "max_order must be non-negative");
  for (int a = 0; a < 3; ++a) {
    require(source[a] > 0.0 && source[a] < dims[a],
            "source must lie strictly inside the room");
  }
  std::array<double, 6> refl{};
  for (int w = 0; w < 6; ++w) refl[w] = std::sqrt(1.0 - wall_absorption[w]);

  // Per-axis candidates: (coordinate, bounces, gain).
  struct AxisImage {
    double coord;
    int order;
    double gain;
  };
  std::array<std::vector<AxisImage>, 3> axes;
  const int n_max = max_order / 2 + 1;
  for (int a = 0; a < 3; ++a) {
    for (int n = -n_max; n <= n_max; ++n) {
      for (int q = 0; q <= 1; ++q) {
        const int lo_hits = std::abs(n - q);
        const int hi_hits = std::abs(n);
        const int order = lo_hits + hi_hits;
        if (order > max_order) continue;
        const double coord = 2.0 * n * dims[a] + (q ? -source[a] : source[a]);
        const double gain = std::pow(refl[2 * a], lo_hits) *
                            std::pow(refl[2 * a + 1], hi_hits);
        axes[a].push_back({coord, order, gain});
      }
    }
  }
  std::vector<ImageSource> images;
  for (const AxisImage& ix : axes[0]) {
    for (const AxisImage& iy : axes[1]) {
      if (ix.order + iy.order > max_order) continue;
      for (const AxisImage& iz : axes[2]) {
        const int order = ix.order + iy.order + iz.order;
        if (order > max_order) continue;
        const double gain = ix.gain * iy.gain * iz.gain;
        if (order > 0 && gain <= 0.0) continue;
        images.push_back({{ix.coord, iy.coord, iz.coord}, order, gain, {}});
      }
    }
  }
  return images;
}

inline std::array<double, 6> shoebox_wall_absorption(const Scene& scene) {
  std::array<double, 6> alpha{};
  std::array<bool, 6> seen{};
  for (std::size_t i = 0; i < scene.triangles().size(); ++i) {
    const std::size_t s = scene.triangles()[i].surface_id;
    if (s < 6 && !seen[s]) {
      alpha[s] = scene.material_of(i).mean_absorption();
      seen[s] = true;
    }
  }
  return alpha;
}

// Closed form for the number of candidate images of order 1..max_order
// over n_surfaces planes without immediate re-reflection.
inline std::size_t candidate_count(std::size_t n_surfaces, int max_order) {
  std::size_t total = 0;
  std::size_t level = n_surfaces;
  for (int k = 1; k <= max_order; ++k) {
    total += level;
    level *= n_surfaces > 0 ? n_surfaces - 1 : 0;
  }
  return total;
}

// Mirrors the source recursively across every surface plane, never
// reflecting twice in a row on the same surface. Order-0 source first, then
// breadth-first by order with surface ids ascending.
inline std::vector<ImageSource> enumerate_images_generic(const Scene& scene,
                                                         const Vec3& source,
                                                         int max_order) {
  require(max_order >= 0, "max_order must be non-negative");
  const std::vector<Surface> surfaces = scene_surfaces(scene);
  std::vector<ImageSource> images;
  images.push_back({source, 0, 1.0, {}});
  std::size_t level_begin = 0;
  for (int k = 1; k <= max_order; ++k) {
    const std::size_t level_end = images.size();
    for (std::size_t p = level_begin; p < level_end; ++p) {
      for (std::size_t s = 0; s < surfaces.size(); ++s) {
        if (surfaces[s].triangles.empty()) continue;
        if (!images[p].surfaces.empty() && images[p].surfaces.back() == s) {
          continue;
        }
        ImageSource child;
        child.position = mirror_across(images[p].position, surfaces[s].point,
                                       surfaces[s].normal);
        child.order = k;
        child.gain =
            images[p].gain * std::sqrt(1.0 - surfaces[s].absorption);
        child.surfaces = images[p].surfaces;
        child.surfaces.push_back(s);
        images.push_back(std::move(child));
      }
    }
    level_begin = level_end;
  }
  return images;
}

// Number of candidate images (order >= 1) the generic construction
// produces before validation.
inline std::size_t image_count(const Scene& scene, int max_order) {
  return enumerate_images_generic(scene, scene.bounds().center(), max_order)
             .size() -
         1;
}

namespace detail {

inline bool point_in_triangle(const Triangle& t, const Vec3& p) {
  const Vec3 e1 = t.vertices[1] - t.vertices[0];
  const Vec3 e2 = t.vertices[2] - t.vertices[0];
  const Vec3 w = p - t.vertices[0];
  const double d11 = dot(e1, e1), d12 = dot(e1, e2), d22 = dot(e2, e2);
  const double w1 = dot(w, e1), w2 = dot(w, e2);
  const double det = d11 * d22 - d12 * d12;
  const double u = (d22 * w1 - d12 * w2) / det;
  const double v = (d11 * w2 - d12 * w1) / det;
  constexpr double kSlack = 1e-9;
  return u >= -kSlack && v >= -kSlack && u + v <= 1.0 + kSlack;
}

inline double fold_coordinate(double u, double length) {
  const double period = 2.0 * length;
  double r = std::fmod(u, period);
  if (r < 0.0) r += period;
  return r > length ? period - r : r;
}

// Reflection points of a lattice image path, source side first.
inline std::optional<std::vector<Vec3>> lattice_path(const Scene& scene,
                                                     const Vec3& dims,
                                                     const ImageSource& image,
                                                     const Vec3& listener) {
  const Vec3 source{fold_coordinate(image.position.x, dims.x),
                    fold_coordinate(image.position.y, dims.y),
                    fold_coordinate(image.position.z, dims.z)};
  const Vec3 delta = image.position - listener;
  std::vector<double> crossings;
  for (int a = 0; a < 3; ++a) {
    if (delta[a] == 0.0) continue;
    const double lo = std::min(listener[a], image.position[a]);
    const double hi = std::max(listener[a], image.position[a]);
    for (double m = std::ceil(lo / dims[a]); m * dims[a] <= hi; m += 1.0) {
      const double plane = m * dims[a];
      if (plane <= lo || plane >= hi) continue;
      crossings.push_back((plane - listener[a]) / delta[a]);
    }
  }
  std::sort(crossings.begin(), crossings.end(), std::greater<>());
  std::vector<Vec3> points;
  points.reserve(crossings.size());
  for (double t : crossings) {
    const Vec3 u = listener + delta * t;
    points.push_back({fold_coordinate(u.x, dims.x), fold_coordinate(u.y, dims.y),
                      fold_coordinate(u.z, dims.z)});
  }
  Vec3 from = source;
  for (const Vec3& p : points) {
    if (scene.occluded(from, p)) return std::nullopt;
    from = p;
  }
  if (scene.occluded(from, listener)) return std::nullopt;
  return points;
}

}  // namespace detail

// Unfolds an image path from the listener back to the source. Returns the
// reflection points (source side first) when every segment crosses its
// generating surface inside the surface's extent and no segment is blocked;
// otherwise nullopt. Lattice images (empty surface list) require a shoebox
// scene.
inline std::optional<std::vector<Vec3>> validate_image_path(
    const Scene& scene, const std::vector<Surface>& surfaces,
    const ImageSource& image, const Vec3& listener) {
  if (image.order == 0) {
    if (scene.occluded(image.position, listener)) return std::nullopt;
    return std::vector<Vec3>{};
  }
  if (image.surfaces.empty()) {
    require(scene.shoebox_dims().has_value(),
            "lattice images can only be validated in a shoebox scene");
    return detail::lattice_path(scene, *scene.shoebox_dims(), image, listener);
  }
  std::vector<Vec3> points(image.surfaces.size());
  Vec3 target = listener;
  Vec3 current = image.position;
  for (std::size_t j = image.surfaces.size(); j-- > 0;) {
    const Surface& s = surfaces.at(image.surfaces[j]);
    const Vec3 dir = current - target;
    const double denom = dot(dir, s.normal);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = dot(s.point - target, s.normal) / denom;
    if (!(t > 1e-9 && t < 1.0 - 1e-9)) return std::nullopt;
    const Vec3 p = target + dir * t;
    const bool inside = std::any_of(
        s.triangles.begin(), s.triangles.end(), [&](std::size_t tri) {
          return detail::point_in_triangle(scene.triangles()[tri], p);
        });
    if (!inside) return std::nullopt;
    if (scene.occluded(p, target)) return std::nullopt;
    points[j] = p;
    target = p;
    current = mirror_across(current, s.point, s.normal);
  }
  // `current` is now the original source.
  if (scene.occluded(current, target)) return std::nullopt;
  return points;
}

inline std::optional<std::vector<Vec3>> validate_image_path(
    const Scene& scene, const ImageSource& image, const Vec3& listener) {
  return validate_image_path(scene, scene_surfaces(scene), image, listener);
}

inline constexpr int kSincTaps = 81;

// Adds amplitude * windowed-sinc(n - delay) (Hann window, 81 taps) into out.
inline void add_fractional_impulse(std::vector<double>& out, double delay,
                                   double amplitude) {
  constexpr int half = kSincTaps / 2;
  constexpr double window_half = half + 1.0;
  const long long center = std::llround(delay);
  const double x0 = static_cast<double>(center) - delay;  // in [-0.5, 0.5]
  const double sin_x0 = std::sin(kPi * x0);
  // cos(pi * (x0 + j) / window_half) by rotation, j = -half .. half.
  const double step = kPi / window_half;
  const double cs = std::cos(step), sn = std::sin(step);
  double c = std::cos(kPi * (x0 - half) / window_half);
  double s = std::sin(kPi * (x0 - half) / window_half);
  for (int j = -half; j <= half; ++j) {
    const long long n = center + j;
    const double x = x0 + j;
    if (n >= 0 && n < static_cast<long long>(out.size())) {
      const double sinc =
          std::abs(x) < 1e-12 ? 1.0
                              : ((j & 1) ? -sin_x0 : sin_x0) / (kPi * x);
      out[static_cast<std::size_t>(n)] += amplitude * sinc * 0.5 * (1.0 + c);
    }
    const double c_next = c * cs - s * sn;
    s = s * cs + c * sn;
    c = c_next;
  }
}

struct ImageRenderOptions {
  bool fractional_delay = true;  // false: nearest-sample placement
  std::size_t workers = 1;
};

// Reflection order giving ~60 dB of decay: ceil(c * T60 / shortest side).
inline int default_image_order(const Vec3& dims, double t60) {
  const double shortest = std::min({dims.x, dims.y, dims.z});
  return static_cast<int>(std::ceil(kSpeedOfSound * t60 / shortest));
}

inline ImpulseResponse render_ir_image(const Scene& scene, const Vec3& source,
                                       const std::vector<Vec3>& receivers,
                                       int max_order, double fs,
                                       double ir_length,
                                       const ImageRenderOptions& opts = {}) {
  require(fs > 0.0, "sample rate must be positive");
  require(ir_length > 0.0, "IR length must be positive");
  require(!receivers.empty(), "at least one receiver is required");
  require(scene.is_interior(source), "source must lie inside the scene");
  for (const Vec3& r : receivers) {
    require(scene.is_interior(r), "receivers must lie inside the scene");
  }
  const auto length = static_cast<std::size_t>(std::ceil(ir_length * fs));
  for (const Vec3& r : receivers) {
    const double direct = distance(source, r) / kSpeedOfSound * fs;
    if (direct >= static_cast<double>(length)) {
      fail(Errc::kIrTooShort, "IR length " + std::to_string(ir_length) +
                                  " s is shorter than the direct delay " +
                                  std::to_string(direct / fs) + " s");
    }
  }

  std::vector<ImageSource> images;
  bool validate = true;
  if (scene.shoebox_dims()) {
    images = enumerate_images_shoebox(*scene.shoebox_dims(), source,
                                      max_order,
                                      shoebox_wall_absorption(scene));
    validate = !scene.obstacles().empty();
  } else {
    images = enumerate_images_generic(scene, source, max_order);
  }

  const std::vector<Surface> surfaces = scene_surfaces(scene);
  const double max_delay = static_cast<double>(length) + kSincTaps;
  std::vector<std::vector<double>> channels(receivers.size(),
                                            std::vector<double>(length, 0.0));
  std::vector<std::size_t> accepted(receivers.size(), 0);
  parallel_for(receivers.size(), opts.workers, [&](std::size_t r) {
    const Vec3& rx = receivers[r];
    auto& out = channels[r];
    for (const ImageSource& img : images) {
      const double d = distance(img.position, rx);
      const double delay = d / kSpeedOfSound * fs;
      if (delay > max_delay) continue;
      if (validate && !validate_image_path(scene, surfaces, img, rx)) {
        continue;
      }
      ++accepted[r];
      const double amplitude = img.gain / (4.0 * kPi * d);
      if (opts.fractional_delay) {
        add_fractional_impulse(out, delay, amplitude);
      } else {
        const auto n = static_cast<std::size_t>(std::llround(delay));
        if (n < out.size()) out[n] += amplitude;
      }
    }
  });

  IrMetadata meta;
  meta.engine = "image";
  meta.source = source;
  meta.mics = receivers;
  meta.room_dims = scene.shoebox_dims();
  meta.extra["max_order"] = max_order;
  meta.extra["fractional_delay"] = opts.fractional_delay;
  meta.extra["n_candidates"] = images.size();
  meta.extra["n_accepted"] = accepted;
  return ImpulseResponse(std::move(channels), fs, std::move(meta));
}

}  // namespace roomsim
