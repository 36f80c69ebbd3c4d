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

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roomsim/bvh.hpp"
#include "roomsim/error.hpp"
#include "roomsim/material.hpp"
#include "roomsim/rng.hpp"
#include "roomsim/vec3.hpp"

namespace roomsim {

// Hits closer than this to the ray origin are ignored.
inline constexpr double kSelfIntersectionEpsilon = 1e-7;

struct Triangle {
  std::array<Vec3, 3> vertices;
  std::size_t material_id = 0;
  // Coplanar triangles forming one reflecting surface share an id. Room
  // boundaries of a shoebox use surfaces 0..5 in the order
  // x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
  std::size_t surface_id = 0;

  Vec3 normal() const {
    return normalized(cross(vertices[1] - vertices[0],
                            vertices[2] - vertices[0]));
  }
  double area() const {
    return 0.5 * norm(cross(vertices[1] - vertices[0],
                            vertices[2] - vertices[0]));
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  std::size_t triangle_index = 0;
  double distance = 0.0;
  Vec3 point;
  // Unit normal of the hit triangle, oriented against the ray direction.
  Vec3 normal;
};

enum class Acceleration { kAuto, kNone, kBvh };

// Immutable triangle scene. Safe to share across threads once constructed.
class Scene {
 public:
  static constexpr std::size_t kAutoBvhThreshold = 48;

  Scene(std::vector<Triangle> triangles, std::vector<Material> materials,
        Acceleration accel = Acceleration::kAuto)
      : triangles_(std::move(triangles)), materials_(std::move(materials)) {
    require(!materials_.empty(), "scene needs at least one material");
    prims_.reserve(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      const Triangle& t = triangles_[i];
      require(t.material_id < materials_.size(),
              "triangle " + std::to_string(i) + " has invalid material id " +
                  std::to_string(t.material_id));
      require(t.area() > 1e-12,
              "triangle " + std::to_string(i) + " is degenerate");
      for (const Vec3& v : t.vertices) bounds_.grow(v);
      prims_.push_back({t.vertices[0], t.vertices[1] - t.vertices[0],
                        t.vertices[2] - t.vertices[0]});
      surface_count_ = std::max(surface_count_, t.surface_id + 1);
    }
    const std::size_t bands = materials_.front().n_bands();
    for (const Material& m : materials_) {
      require(m.n_bands() == bands,
              "all scene materials must have the same band count");
    }
    set_acceleration(accel);
  }

  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Material>& materials() const { return materials_; }
  const Material& material_of(std::size_t triangle) const {
    return materials_[triangles_[triangle].material_id];
  }
  const Aabb& bounds() const { return bounds_; }
  const std::vector<Aabb>& obstacles() const { return obstacles_; }
  std::size_t surface_count() const { return surface_count_; }
  std::size_t n_bands() const { return materials_.front().n_bands(); }
  bool accelerated() const { return bvh_ != nullptr; }

  // Set when the scene was produced by make_shoebox (possibly with
  // obstacles added afterwards).
  const std::optional<Vec3>& shoebox_dims() const { return shoebox_dims_; }

  // Interior volume: bounding box minus obstacle boxes. Meaningful for
  // shoebox scenes.
  double volume() const {
    double v = bounds_.volume();
    for (const Aabb& o : obstacles_) v -= o.volume();
    return v;
  }

  double surface_area() const {
    double s = 0.0;
    for (const Triangle& t : triangles_) s += t.area();
    return s;
  }

  // Point is inside the room bounds and outside every obstacle.
  bool is_interior(const Vec3& p) const {
    if (!bounds_.strictly_contains(p)) return false;
    for (const Aabb& o : obstacles_) {
      if (o.contains(p)) return false;
    }
    return true;
  }

  std::optional<Hit> intersect(const Ray& ray) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    auto test = [&](std::uint32_t i) {
      const double t = detail::intersect_prim(prims_[i], ray.origin,
                                              ray.direction);
      if (t > kSelfIntersectionEpsilon &&
          (t < best || (t == best && i < best_index))) {
        best = t;
        best_index = i;
      }
    };
    if (bvh_) {
      bvh_->traverse(ray.origin, ray.direction, best, test);
    } else {
      for (std::uint32_t i = 0; i < prims_.size(); ++i) test(i);
    }
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    Hit hit;
    hit.triangle_index = best_index;
    hit.distance = best;
    hit.point = ray.origin + ray.direction * best;
    hit.normal = triangles_[best_index].normal();
    if (dot(hit.normal, ray.direction) > 0.0) hit.normal = -hit.normal;
    return hit;
  }

  // True when some surface lies strictly between a and b. Surfaces within
  // `slack` of either endpoint are ignored so that segments ending on a
  // reflection point are not reported as self-occluded.
  bool occluded(const Vec3& a, const Vec3& b, double slack = 1e-6) const {
    const Vec3 d = b - a;
    const double len = norm(d);
    if (len <= 2.0 * slack) return false;
    const Ray ray{a + d / len * slack, d / len};
    const auto hit = intersect(ray);
    return hit && hit->distance < len - 2.0 * slack;
  }

  // Returns a copy with an axis-aligned box obstacle appended. Each box face
  // is split into `subdivisions` x `subdivisions` quads (2 triangles each).
  Scene with_obstacle(const Aabb& box, std::size_t material_id,
                      std::size_t subdivisions = 1) const;

  Scene with_acceleration(Acceleration accel) const {
    Scene copy = *this;
    copy.set_acceleration(accel);
    return copy;
  }

 private:
  friend Scene make_shoebox(const Vec3&, std::vector<Material>, std::size_t);

  void set_acceleration(Acceleration accel) {
    const bool use = accel == Acceleration::kBvh ||
                     (accel == Acceleration::kAuto &&
                      prims_.size() > kAutoBvhThreshold);
    bvh_ = use ? std::make_shared<const Bvh>(prims_) : nullptr;
  }

  std::vector<Triangle> triangles_;
  std::vector<Material> materials_;
  std::vector<TrianglePrim> prims_;
  std::vector<Aabb> obstacles_;
  Aabb bounds_;
  std::size_t surface_count_ = 0;
  std::optional<Vec3> shoebox_dims_;
  std::shared_ptr<const Bvh> bvh_;
};

namespace detail {

// Appends the quad a-b-c-d (in order around its boundary) as a grid of
// triangles whose normals point along `facing`.
inline void append_quad(std::vector<Triangle>& out, const Vec3& a,
                        const Vec3& b, const Vec3& c, const Vec3& d,
                        const Vec3& facing, std::size_t material_id,
                        std::size_t surface_id, std::size_t subdivisions) {
  const std::size_t n = subdivisions == 0 ? 1 : subdivisions;
  auto at = [&](double u, double v) {
    // Bilinear over the (planar, rectangular) quad.
    return a + (b - a) * u + (d - a) * v;
  };
  (void)c;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u0 = static_cast<double>(i) / static_cast<double>(n);
      const double u1 = static_cast<double>(i + 1) / static_cast<double>(n);
      const double v0 = static_cast<double>(j) / static_cast<double>(n);
      const double v1 = static_cast<double>(j + 1) / static_cast<double>(n);
      const Vec3 p00 = at(u0, v0);
      const Vec3 p10 = at(u1, v0);
      const Vec3 p11 = at(u1, v1);
      const Vec3 p01 = at(u0, v1);
      Triangle t1{{p00, p10, p11}, material_id, surface_id};
      Triangle t2{{p00, p11, p01}, material_id, surface_id};
      if (dot(t1.normal(), facing) < 0.0) std::swap(t1.vertices[1], t1.vertices[2]);
      if (dot(t2.normal(), facing) < 0.0) std::swap(t2.vertices[1], t2.vertices[2]);
      out.push_back(t1);
      out.push_back(t2);
    }
  }
}

// Six faces of a box. `inward` selects normals pointing into the box (room
// boundary) or out of it (obstacle).
inline void append_box(std::vector<Triangle>& out, const Aabb& box,
                       bool inward, std::size_t material_id,
                       std::size_t first_surface, std::size_t subdivisions) {
  const Vec3 lo = box.lo;
  const Vec3 hi = box.hi;
  const double s = inward ? 1.0 : -1.0;
  // x = lo.x, x = hi.x
  append_quad(out, {lo.x, lo.y, lo.z}, {lo.x, hi.y, lo.z}, {lo.x, hi.y, hi.z},
              {lo.x, lo.y, hi.z}, {s, 0, 0}, material_id, first_surface + 0,
              subdivisions);
  append_quad(out, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z},
              {hi.x, lo.y, hi.z}, {-s, 0, 0}, material_id, first_surface + 1,
              subdivisions);
  // y = lo.y, y = hi.y
  append_quad(out, {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, lo.y, hi.z},
              {lo.x, lo.y, hi.z}, {0, s, 0}, material_id, first_surface + 2,
              subdivisions);
  append_quad(out, {lo.x, hi.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z},
              {lo.x, hi.y, hi.z}, {0, -s, 0}, material_id, first_surface + 3,
              subdivisions);
  // z = lo.z, z = hi.z
  append_quad(out, {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z},
              {lo.x, hi.y, lo.z}, {0, 0, s}, material_id, first_surface + 4,
              subdivisions);
  append_quad(out, {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z},
              {lo.x, hi.y, hi.z}, {0, 0, -s}, material_id, first_surface + 5,
              subdivisions);
}

}  // namespace detail

// Closed box [0,Lx]x[0,Ly]x[0,Lz] made of 12 inward-facing triangles, all
// using materials[material_id].
inline Scene make_shoebox(const Vec3& dims, std::vector<Material> materials,
                          std::size_t material_id = 0) {
  require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0,
          "room dimensions must be positive");
  require(material_id < materials.size(), "invalid material id");
  std::vector<Triangle> tris;
  tris.reserve(12);
  Aabb box;
  box.grow(Vec3{0, 0, 0});
  box.grow(dims);
  detail::append_box(tris, box, /*inward=*/true, material_id, 0, 1);
  Scene scene(std::move(tris), std::move(materials));
  scene.shoebox_dims_ = dims;
  return scene;
}

inline Scene make_shoebox(const Vec3& dims, const Material& walls) {
  return make_shoebox(dims, std::vector<Material>{walls}, 0);
}

inline Scene Scene::with_obstacle(const Aabb& box, std::size_t material_id,
                                  std::size_t subdivisions) const {
  require(material_id < materials_.size(), "invalid obstacle material id");
  const Vec3 e = box.extent();
  require(e.x > 0.0 && e.y > 0.0 && e.z > 0.0,
          "obstacle box must have positive extent");
  std::vector<Triangle> tris = triangles_;
  detail::append_box(tris, box, /*inward=*/false, material_id, surface_count_,
                     subdivisions);
  Scene out(std::move(tris), materials_, Acceleration::kAuto);
  out.obstacles_ = obstacles_;
  out.obstacles_.push_back(box);
  out.shoebox_dims_ = shoebox_dims_;
  if (bvh_ && !out.bvh_) out.set_acceleration(Acceleration::kBvh);
  return out;
}

// Mirror-law reflection of `incoming` about `normal`.
inline Vec3 reflect_specular(const Vec3& incoming, const Vec3& normal) {
  const double c = dot(incoming, normal);
  require(c < 0.0, "incoming direction does not face the surface");
  return incoming - normal * (2.0 * c);
}

// Orthonormal basis (t, b) completing unit n (Duff et al. 2017).
inline void orthonormal_basis(const Vec3& n, Vec3& t, Vec3& b) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double bb = n.x * n.y * a;
  t = {1.0 + sign * n.x * n.x * a, sign * bb, -sign * n.x};
  b = {bb, sign + n.y * n.y * a, -n.y};
}

// Cosine-weighted direction in the hemisphere around `normal`
// (pdf = cos(theta) / pi).
inline Vec3 sample_lambert(const Vec3& normal, RandomStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = std::sqrt(u1);
  const double phi = 2.0 * kPi * u2;
  const double z = std::sqrt(1.0 - u1);  // > 0 since u1 < 1
  Vec3 t, b;
  orthonormal_basis(normal, t, b);
  return normalized(t * (r * std::cos(phi)) + b * (r * std::sin(phi)) +
                    normal * z);
}

// Uniform direction on the sphere from two numbers in [0, 1).
inline Vec3 sphere_direction(double u1, double u2) {
  const double z = 1.0 - 2.0 * u1;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

inline Vec3 sample_sphere(RandomStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  return sphere_direction(u1, u2);
}

// n_mics points on a circle of `radius` in the plane perpendicular to
// `axis`. Mic 0 sits along the projection of +x onto that plane (or +y when
// the axis is parallel to x), rotated by `rotation_rad` about the axis.
inline std::vector<Vec3> circular_array(const Vec3& center, double radius,
                                        std::size_t n_mics, const Vec3& axis,
                                        double rotation_rad = 0.0) {
  require(radius > 0.0, "array radius must be positive");
  require(n_mics >= 1, "array needs at least one microphone");
  const Vec3 a = normalized(axis);
  Vec3 ref{1.0, 0.0, 0.0};
  if (std::abs(dot(ref, a)) > 1.0 - 1e-9) ref = {0.0, 1.0, 0.0};
  const Vec3 e1 = normalized(ref - a * dot(ref, a));
  const Vec3 e2 = cross(a, e1);
  std::vector<Vec3> mics;
  mics.reserve(n_mics);
  for (std::size_t k = 0; k < n_mics; ++k) {
    const double angle = 2.0 * kPi * static_cast<double>(k) /
                             static_cast<double>(n_mics) +
                         rotation_rad;
    mics.push_back(center + e1 * (radius * std::cos(angle)) +
                   e2 * (radius * std::sin(angle)));
  }
  return mics;
}

}  // namespace roomsim
