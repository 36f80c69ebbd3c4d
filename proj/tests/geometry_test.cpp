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

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "roomsim/geometry.hpp"
#include "roomsim/rng.hpp"

namespace roomsim {
namespace {

const Material kWall(0.3, 0.5);

// Plane-then-inside-test intersection, written independently of the
// library's Moller-Trumbore kernel.
std::optional<double> brute_force_hit(const Scene& scene, const Ray& ray) {
  std::optional<double> best;
  for (const Triangle& t : scene.triangles()) {
    const Vec3 n = t.normal();
    const double denom = dot(n, ray.direction);
    if (std::abs(denom) < 1e-15) continue;
    const double d = dot(t.vertices[0] - ray.origin, n) / denom;
    if (d <= kSelfIntersectionEpsilon) continue;
    const Vec3 p = ray.origin + ray.direction * d;
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
      const Vec3& a = t.vertices[k];
      const Vec3& b = t.vertices[(k + 1) % 3];
      if (dot(cross(b - a, p - a), n) < -1e-9) inside = false;
    }
    if (inside && (!best || d < *best)) best = d;
  }
  return best;
}

TEST(MakeShoebox, HasTwelveInwardTriangles) {
  const Scene s = make_shoebox({4, 5, 3}, kWall);
  ASSERT_EQ(s.triangles().size(), 12u);
  const Vec3 center{2, 2.5, 1.5};
  for (const Triangle& t : s.triangles()) {
    EXPECT_EQ(t.material_id, 0u);
    const Vec3 centroid =
        (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0;
    EXPECT_GT(dot(t.normal(), center - centroid), 0.0);
  }
}

TEST(MakeShoebox, AreaAndVolume) {
  EXPECT_NEAR(make_shoebox({4, 5, 3}, kWall).surface_area(), 94.0, 1e-9);
  EXPECT_NEAR(make_shoebox({3, 3, 2.5}, kWall).volume(), 22.5, 1e-9);
  EXPECT_NEAR(make_shoebox({8, 10, 6}, kWall).volume(), 480.0, 1e-9);
}

TEST(MakeShoebox, RejectsNonPositiveDims) {
  EXPECT_THROW(make_shoebox({0, 5, 3}, kWall), Error);
  EXPECT_THROW(make_shoebox({4, -1, 3}, kWall), Error);
}

TEST(MakeShoebox, ObstacleAddsTwelveTriangles) {
  const Scene s = make_shoebox({4, 5, 3}, kWall)
                      .with_obstacle({{2, 0.5, 0}, {3, 1.5, 3}}, 0);
  EXPECT_EQ(s.triangles().size(), 24u);
  EXPECT_EQ(s.obstacles().size(), 1u);
}

TEST(Scene, RejectsInvalidMaterialAndDegenerateTriangles) {
  Triangle bad{{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}}, 3, 0};
  EXPECT_THROW(Scene({bad}, {kWall}), Error);
  Triangle flat{{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{2, 0, 0}}, 0, 0};
  EXPECT_THROW(Scene({flat}, {kWall}), Error);
}

TEST(Intersect, AxisAlignedRays) {
  const Scene s = make_shoebox({4, 5, 3}, kWall);
  auto h = s.intersect({{1, 1, 1}, {1, 0, 0}});
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->distance, 3.0, 1e-12);
  EXPECT_NEAR(distance(h->point, {4, 1, 1}), 0.0, 1e-12);
  h = s.intersect({{1, 1, 1}, {0, 0, -1}});
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->distance, 1.0, 1e-12);
  EXPECT_NEAR(distance(h->point, {1, 1, 0}), 0.0, 1e-12);
}

TEST(Intersect, ObstacleFaceMatchesBruteForce) {
  const Scene s = make_shoebox({4, 5, 3}, kWall)
                      .with_obstacle({{2, 0.5, 0}, {3, 1.5, 3}}, 0);
  const Ray ray{{1, 1, 1}, {1, 0, 0}};
  const auto h = s.intersect(ray);
  const auto oracle = brute_force_hit(s, ray);
  ASSERT_TRUE(h && oracle);
  EXPECT_NEAR(h->distance, 1.0, 1e-12);
  EXPECT_NEAR(h->distance, *oracle, 1e-12);
  EXPECT_NEAR(h->point.x, 2.0, 1e-12);
}

TEST(Intersect, HitInvariants) {
  const Scene s = make_shoebox({4, 5, 3}, kWall)
                      .with_obstacle({{1.5, 2, 0.5}, {2.5, 3, 1.5}}, 0, 3);
  RandomStream rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 o{rng.uniform(0.1, 1.4), rng.uniform(0.1, 4.9),
                 rng.uniform(0.1, 2.9)};
    const Ray ray{o, sample_sphere(rng)};
    const auto h = s.intersect(ray);
    ASSERT_TRUE(h);
    EXPECT_GT(h->distance, kSelfIntersectionEpsilon);
    EXPECT_LE(norm(h->point - (ray.origin + ray.direction * h->distance)),
              1e-9 * std::max(1.0, h->distance));
    EXPECT_NEAR(norm(h->normal), 1.0, 1e-9);
    EXPECT_LT(dot(h->normal, ray.direction), 0.0);
  }
}

TEST(Intersect, LinearScanAndBvhAgreeWithBruteForce) {
  const Scene base = make_shoebox({6, 7, 3}, kWall)
                         .with_obstacle({{1, 1, 0}, {2, 2, 1}}, 0, 4)
                         .with_obstacle({{3, 4, 0.5}, {4.5, 5, 2}}, 0, 4);
  const Scene linear = base.with_acceleration(Acceleration::kNone);
  const Scene bvh = base.with_acceleration(Acceleration::kBvh);
  ASSERT_FALSE(linear.accelerated());
  ASSERT_TRUE(bvh.accelerated());
  RandomStream rng(3);
  for (int i = 0; i < 3000; ++i) {
    Vec3 o;
    do {
      o = {rng.uniform(0, 6), rng.uniform(0, 7), rng.uniform(0, 3)};
    } while (!base.is_interior(o));
    const Ray ray{o, sample_sphere(rng)};
    const auto a = linear.intersect(ray);
    const auto b = bvh.intersect(ray);
    const auto oracle = brute_force_hit(base, ray);
    ASSERT_TRUE(a && b && oracle);
    EXPECT_EQ(a->triangle_index, b->triangle_index);
    EXPECT_EQ(a->distance, b->distance);
    EXPECT_NEAR(a->distance, *oracle, 1e-9);
  }
}

TEST(Intersect, ClosedShoeboxAlwaysHits) {
  RandomStream rng(5);
  for (int room = 0; room < 20; ++room) {
    const Vec3 dims{rng.uniform(3, 8), rng.uniform(3, 10), rng.uniform(2.5, 6)};
    const Scene s = make_shoebox(dims, kWall);
    for (int i = 0; i < 500; ++i) {
      const Vec3 o{rng.uniform(0, dims.x), rng.uniform(0, dims.y),
                   rng.uniform(0, dims.z)};
      if (!s.is_interior(o)) continue;
      EXPECT_TRUE(s.intersect({o, sample_sphere(rng)}));
    }
  }
}

TEST(Intersect, Deterministic) {
  const Scene s = make_shoebox({4, 5, 3}, kWall);
  const Ray ray{{1.2, 3.4, 0.7}, normalized(Vec3{0.3, -0.2, 0.9})};
  const auto a = s.intersect(ray);
  const auto b = s.intersect(ray);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->triangle_index, b->triangle_index);
  EXPECT_EQ(a->distance, b->distance);
  EXPECT_EQ(a->point, b->point);
}

TEST(Occluded, ObstacleBlocksSegment) {
  const Scene s = make_shoebox({4, 5, 3}, kWall)
                      .with_obstacle({{2, 0.5, 0}, {3, 1.5, 3}}, 0);
  EXPECT_TRUE(s.occluded({1, 1, 1}, {3.5, 1, 1}));
  EXPECT_FALSE(s.occluded({1, 3, 1}, {3.5, 3, 1}));
}

TEST(ReflectSpecular, Examples) {
  const double r2 = std::sqrt(2.0);
  const Vec3 a = reflect_specular(Vec3{1, -1, 0} / r2, {0, 1, 0});
  EXPECT_NEAR(distance(a, Vec3{1, 1, 0} / r2), 0.0, 1e-15);
  EXPECT_EQ(reflect_specular({0, -1, 0}, {0, 1, 0}), (Vec3{0, 1, 0}));
  const Vec3 c = reflect_specular({0.6, -0.8, 0}, {0, 1, 0});
  EXPECT_NEAR(distance(c, Vec3{0.6, 0.8, 0}), 0.0, 1e-15);
}

TEST(ReflectSpecular, RejectsDirectionsLeavingTheSurface) {
  EXPECT_THROW(reflect_specular({0, 1, 0}, {0, 1, 0}), Error);
  EXPECT_THROW(reflect_specular({1, 0, 0}, {0, 1, 0}), Error);
}

TEST(ReflectSpecular, PreservesNormAndIsAnInvolution) {
  RandomStream rng(17);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 n = sample_sphere(rng);
    Vec3 d = sample_sphere(rng);
    if (dot(d, n) >= 0.0) d = -d;
    if (dot(d, n) > -1e-6) continue;
    const Vec3 r = reflect_specular(d, n);
    EXPECT_NEAR(norm(r), 1.0, 1e-9);
    EXPECT_NEAR(dot(r, n), -dot(d, n), 1e-12);
    const Vec3 back = reflect_specular(r, -n);
    EXPECT_LE(distance(back, d), 1e-9);
  }
}

TEST(SampleLambert, StaysInHemisphere) {
  RandomStream rng(23);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 n = sample_sphere(rng);
    const Vec3 d = sample_lambert(n, rng);
    EXPECT_GT(dot(d, n), 0.0);
    EXPECT_NEAR(norm(d), 1.0, 1e-9);
  }
}

TEST(SampleLambert, MeanCosineIsTwoThirds) {
  RandomStream rng(29);
  const Vec3 n{0, 0, 1};
  double sum = 0.0;
  constexpr int kN = 1000000;
  for (int i = 0; i < kN; ++i) sum += dot(sample_lambert(n, rng), n);
  EXPECT_NEAR(sum / kN, 2.0 / 3.0, 0.002);
}

TEST(SampleLambert, AzimuthIsUniform) {
  RandomStream rng(31);
  constexpr int kN = 1000000, kBins = 36;
  std::vector<double> counts(kBins, 0.0);
  for (int i = 0; i < kN; ++i) {
    const Vec3 d = sample_lambert({0, 0, 1}, rng);
    double phi = std::atan2(d.y, d.x);
    if (phi < 0) phi += 2 * kPi;
    counts[std::min(kBins - 1, static_cast<int>(phi / (2 * kPi) * kBins))] += 1;
  }
  const double expected = static_cast<double>(kN) / kBins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 0.001 quantile of chi-square with 35 degrees of freedom.
  EXPECT_LT(chi2, 66.619);
}

TEST(CircularArray, SixMicExamples) {
  const auto mics = circular_array({0, 0, 0}, 0.035, 6, {0, 0, 1});
  ASSERT_EQ(mics.size(), 6u);
  EXPECT_NEAR(distance(mics[0], {0.035, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(distance(mics[1], {0.0175, 0.0303109, 0}), 0.0, 1e-7);
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(distance(mics[k], mics[(k + 1) % 6]), 0.035, 1e-12);
    EXPECT_NEAR(norm(mics[k]), 0.035, 1e-12);
  }
}

TEST(CircularArray, ArbitraryAxisAndRotation) {
  const Vec3 axis = normalized(Vec3{1, 2, 3});
  const Vec3 c{1, 2, 1};
  const auto mics = circular_array(c, 0.1, 5, axis, 0.4);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(dot(mics[k] - c, axis), 0.0, 1e-12);
    EXPECT_NEAR(distance(mics[k], c), 0.1, 1e-12);
    const double chord = 2 * 0.1 * std::sin(kPi / 5);
    EXPECT_NEAR(distance(mics[k], mics[(k + 1) % 5]), chord, 1e-12);
  }
}

TEST(CircularArray, RejectsBadInput) {
  EXPECT_THROW(circular_array({0, 0, 0}, 0.0, 6, {0, 0, 1}), Error);
  EXPECT_THROW(circular_array({0, 0, 0}, 0.1, 0, {0, 0, 1}), Error);
}

}  // namespace
}  // namespace roomsim
