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
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "roomsim/vec3.hpp"

namespace roomsim {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void grow(const Aabb& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  double volume() const {
    const Vec3 e = extent();
    return e.x * e.y * e.z;
  }
  bool contains(const Vec3& p, double margin = 0.0) const {
    return p.x >= lo.x + margin && p.x <= hi.x - margin &&
           p.y >= lo.y + margin && p.y <= hi.y - margin &&
           p.z >= lo.z + margin && p.z <= hi.z - margin;
  }
  bool strictly_contains(const Vec3& p) const {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y &&
           p.z > lo.z && p.z < hi.z;
  }
};

// Precomputed edge form of a triangle for Moller-Trumbore tests.
struct TrianglePrim {
  Vec3 v0;
  Vec3 e1;
  Vec3 e2;
};

namespace detail {

inline constexpr double kBarycentricSlack = 1e-10;

// Returns the ray parameter of the hit, or a negative value on a miss.
inline double intersect_prim(const TrianglePrim& tri, const Vec3& origin,
                             const Vec3& dir) {
  const Vec3 pvec = cross(dir, tri.e2);
  const double det = dot(tri.e1, pvec);
  if (std::abs(det) < 1e-14) return -1.0;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - tri.v0;
  const double u = dot(tvec, pvec) * inv;
  if (u < -kBarycentricSlack || u > 1.0 + kBarycentricSlack) return -1.0;
  const Vec3 qvec = cross(tvec, tri.e1);
  const double v = dot(dir, qvec) * inv;
  if (v < -kBarycentricSlack || u + v > 1.0 + kBarycentricSlack) return -1.0;
  return dot(tri.e2, qvec) * inv;
}

// Slab test; returns entry distance or +inf on a miss.
inline double intersect_box(const Aabb& box, const Vec3& origin,
                            const Vec3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double tn = (box.lo[a] - origin[a]) * inv_dir[a];
    double tf = (box.hi[a] - origin[a]) * inv_dir[a];
    if (tn > tf) std::swap(tn, tf);
    // NaN (0 * inf) compares false and leaves the interval untouched.
    t0 = tn > t0 ? tn : t0;
    t1 = tf < t1 ? tf : t1;
    if (t0 > t1 * (1.0 + 4e-16) + 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return t0;
}

}  // namespace detail

// Binary bounding-volume hierarchy over triangle primitives. Nearest-hit
// queries return the same (distance, index) winner as a linear scan, ties
// broken toward the lower triangle index.
class Bvh {
 public:
  static constexpr std::size_t kLeafSize = 4;

  explicit Bvh(std::span<const TrianglePrim> prims) {
    const std::size_t n = prims.size();
    order_.resize(n);
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::size_t i = 0; i < n; ++i) {
      order_[i] = static_cast<std::uint32_t>(i);
      const TrianglePrim& p = prims[i];
      boxes[i].grow(p.v0);
      boxes[i].grow(p.v0 + p.e1);
      boxes[i].grow(p.v0 + p.e2);
      centroids[i] = p.v0 + (p.e1 + p.e2) * (1.0 / 3.0);
    }
    nodes_.reserve(2 * n + 1);
    if (n > 0) {
      nodes_.emplace_back();
      build(0, boxes, centroids, 0, n);
    }
  }

  template <typename HitFn>
  void traverse(const Vec3& origin, const Vec3& dir, double& t_best,
                HitFn&& on_leaf_prim) const {
    if (nodes_.empty()) return;
    const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    std::array<std::uint32_t, 64> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (detail::intersect_box(node.box, origin, inv, t_best) ==
          std::numeric_limits<double>::infinity()) {
        continue;
      }
      if (node.count > 0) {
        for (std::uint32_t i = 0; i < node.count; ++i) {
          on_leaf_prim(order_[node.first + i]);
        }
        continue;
      }
      const std::uint32_t left = node.first;
      const std::uint32_t right = left + 1;
      const double tl =
          detail::intersect_box(nodes_[left].box, origin, inv, t_best);
      const double tr =
          detail::intersect_box(nodes_[right].box, origin, inv, t_best);
      // Push the farther child first so the nearer one is visited next.
      if (tl <= tr) {
        if (tr != std::numeric_limits<double>::infinity()) stack[top++] = right;
        if (tl != std::numeric_limits<double>::infinity()) stack[top++] = left;
      } else {
        if (tl != std::numeric_limits<double>::infinity()) stack[top++] = left;
        if (tr != std::numeric_limits<double>::infinity()) stack[top++] = right;
      }
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // child index (inner) or order_ offset (leaf)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  // Fills nodes_[index] for the primitive range [begin, end). Children are
  // allocated as an adjacent pair: left at `first`, right at `first + 1`.
  void build(std::uint32_t index, const std::vector<Aabb>& boxes,
             const std::vector<Vec3>& centroids, std::size_t begin,
             std::size_t end) {
    Aabb box;
    Aabb cbox;
    for (std::size_t i = begin; i < end; ++i) {
      box.grow(boxes[order_[i]]);
      cbox.grow(centroids[order_[i]]);
    }
    nodes_[index].box = box;
    const std::size_t count = end - begin;
    const Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    if (count <= kLeafSize || ext[axis] <= 0.0) {
      nodes_[index].first = static_cast<std::uint32_t>(begin);
      nodes_[index].count = static_cast<std::uint32_t>(count);
      return;
    }
    const std::size_t mid = begin + count / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = centroids[a][axis];
                       const double cb = centroids[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[index].first = left;
    build(left, boxes, centroids, begin, mid);
    build(left + 1, boxes, centroids, mid, end);
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

}  // namespace roomsim
