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

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "roomsim/analysis.hpp"
#include "roomsim/image_engine.hpp"
#include "roomsim/materials.hpp"
#include "roomsim/rng.hpp"

namespace roomsim {
namespace {

// Axis image k of coordinate s in [0, L]: k = 0 is the source, k > 0 mirrors
// across the far wall first, k < 0 across the near wall. |k| bounces.
double axis_image(int k, double s, double length) {
  if (k % 2 == 0) return k * length + s;
  return (k + 1) * length - s;
}

// Near-wall and far-wall bounce counts of axis image k.
std::pair<int, int> axis_bounces(int k) {
  const int m = std::abs(k);
  if (k >= 0) return {m / 2, (m + 1) / 2};
  return {(m + 1) / 2, m / 2};
}

struct Arrival {
  Vec3 position;
  int order;
  double gain;
};

std::vector<Arrival> brute_force_lattice(const Vec3& dims, const Vec3& src,
                                         int max_order,
                                         const std::array<double, 6>& alpha) {
  std::vector<Arrival> out;
  for (int kx = -max_order; kx <= max_order; ++kx) {
    for (int ky = -max_order; ky <= max_order; ++ky) {
      for (int kz = -max_order; kz <= max_order; ++kz) {
        const int order = std::abs(kx) + std::abs(ky) + std::abs(kz);
        if (order > max_order) continue;
        const int ks[3] = {kx, ky, kz};
        Vec3 p;
        double gain = 1.0;
        for (int a = 0; a < 3; ++a) {
          p[a] = axis_image(ks[a], src[a], dims[a]);
          const auto [near, far] = axis_bounces(ks[a]);
          gain *= std::pow(std::sqrt(1 - alpha[2 * a]), near) *
                  std::pow(std::sqrt(1 - alpha[2 * a + 1]), far);
        }
        out.push_back({p, order, gain});
      }
    }
  }
  return out;
}

auto arrival_key(const Vec3& p, int order, double gain) {
  return std::make_tuple(std::round(p.x * 1e6), std::round(p.y * 1e6),
                         std::round(p.z * 1e6), order, std::round(gain * 1e9));
}

TEST(ShoeboxImages, OrderZeroIsTheSource) {
  const auto images = enumerate_images_shoebox({4, 5, 3}, {1, 2, 1}, 0);
  ASSERT_EQ(images.size(), 1u);
  EXPECT_EQ(images[0].position, (Vec3{1, 2, 1}));
  EXPECT_EQ(images[0].gain, 1.0);
}

TEST(ShoeboxImages, ExactOrderCountsMatchBruteForce) {
  const Vec3 dims{4, 5, 3}, src{1.1, 2.3, 0.7};
  for (int max_order = 0; max_order <= 6; ++max_order) {
    const auto images = enumerate_images_shoebox(dims, src, max_order);
    const auto oracle = brute_force_lattice(dims, src, max_order, {});
    EXPECT_EQ(images.size(), oracle.size());
    for (int k = 0; k <= max_order; ++k) {
      const auto count = [&](const auto& v) {
        return std::count_if(v.begin(), v.end(),
                             [&](const auto& i) { return i.order == k; });
      };
      EXPECT_EQ(count(images), count(oracle)) << "order " << k;
    }
  }
  const auto two = enumerate_images_shoebox(dims, src, 2);
  EXPECT_EQ(std::count_if(two.begin(), two.end(),
                          [](const ImageSource& i) { return i.order == 1; }),
            6);
  EXPECT_EQ(std::count_if(two.begin(), two.end(),
                          [](const ImageSource& i) { return i.order == 2; }),
            18);
}

TEST(ShoeboxImages, PositionsAndGainsMatchBruteForce) {
  const Vec3 dims{4, 5, 3}, src{1.1, 2.3, 0.7};
  const std::array<double, 6> alpha = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const auto images = enumerate_images_shoebox(dims, src, 5, alpha);
  const auto oracle = brute_force_lattice(dims, src, 5, alpha);
  std::vector<decltype(arrival_key({}, 0, 0.0))> a, b;
  for (const auto& i : images) a.push_back(arrival_key(i.position, i.order, i.gain));
  for (const auto& i : oracle) b.push_back(arrival_key(i.position, i.order, i.gain));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  for (const auto& i : images) {
    EXPECT_GT(i.gain, 0.0);
    EXPECT_LE(i.gain, 1.0);
  }
}

TEST(ShoeboxImages, RejectsSourceOnBoundary) {
  EXPECT_THROW(enumerate_images_shoebox({4, 5, 3}, {0, 1, 1}, 2), Error);
  EXPECT_THROW(enumerate_images_shoebox({4, 5, 3}, {1, 5, 1}, 2), Error);
  EXPECT_THROW(enumerate_images_shoebox({4, 5, 3}, {1, 1, 1}, -1), Error);
}

// Sequences of surfaces without immediate repeats, counted recursively.
std::size_t brute_force_sequences(std::size_t n, int depth, int last = -1) {
  if (depth == 0) return 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (static_cast<int>(s) == last) continue;
    total += 1 + brute_force_sequences(n, depth - 1, static_cast<int>(s));
  }
  return total;
}

// Five vertical wall patches, z in [0, 3]. Surface 0 is a short piece of
// the y = 0 line that the mirror path of S1 misses; the corner (0, 5) is
// chamfered by surface 4.
Scene five_plane_scene() {
  std::vector<Triangle> tris;
  auto wall = [&](double x0, double y0, double x1, double y1, std::size_t id) {
    const Vec3 a{x0, y0, 0}, b{x1, y1, 0}, c{x1, y1, 3}, d{x0, y0, 3};
    tris.push_back({{a, b, c}, 0, id});
    tris.push_back({{a, c, d}, 0, id});
  };
  wall(4, 0, 5, 0, 0);
  wall(0, 0, 0, 4, 1);
  wall(6, 0, 6, 5, 2);
  wall(1, 5, 6, 5, 3);
  wall(0, 4, 1, 5, 4);
  return Scene(tris, {Material(0.2, 0.0)});
}

TEST(GenericImages, CandidateCountsForFivePlanes) {
  const Scene s = five_plane_scene();
  EXPECT_EQ(s.surface_count(), 5u);
  const std::size_t expected[] = {0, 5, 25, 105};
  for (int d = 1; d <= 3; ++d) {
    EXPECT_EQ(image_count(s, d), expected[d]);
    EXPECT_EQ(candidate_count(5, d), expected[d]);
    EXPECT_EQ(brute_force_sequences(5, d), expected[d]);
  }
  for (std::size_t n = 2; n <= 7; ++n) {
    for (int d = 1; d <= 4; ++d) {
      EXPECT_EQ(candidate_count(n, d), brute_force_sequences(n, d));
    }
  }
}

TEST(GenericImages, OrderMatchesSurfaceListAndNoImmediateRepeats) {
  const Scene s = five_plane_scene();
  for (const ImageSource& img :
       enumerate_images_generic(s, {1.5, 1, 1.5}, 3)) {
    EXPECT_EQ(static_cast<std::size_t>(img.order), img.surfaces.size());
    for (std::size_t j = 1; j < img.surfaces.size(); ++j) {
      EXPECT_NE(img.surfaces[j], img.surfaces[j - 1]);
    }
    EXPECT_NEAR(img.gain, std::pow(std::sqrt(0.8), img.order), 1e-12);
  }
}

TEST(ValidateImagePath, FivePlaneFigureCase) {
  const Scene s = five_plane_scene();
  const Vec3 source{1.5, 1, 1.5}, listener{2.5, 3, 1.5};
  const auto images = enumerate_images_generic(s, source, 1);
  ASSERT_EQ(images.size(), 6u);
  const auto surfaces = scene_surfaces(s);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto path = validate_image_path(s, images[k], listener);
    if (k == 1) {
      EXPECT_FALSE(path) << "S1 must be rejected";
      continue;
    }
    ASSERT_TRUE(path) << "S" << k << " must be valid";
    ASSERT_EQ(path->size(), 1u);
    const Surface& plane = surfaces[images[k].surfaces[0]];
    EXPECT_NEAR(dot((*path)[0] - plane.point, plane.normal), 0.0, 1e-12);
    EXPECT_NEAR(distance(source, (*path)[0]) + distance((*path)[0], listener),
                distance(images[k].position, listener), 1e-12);
  }
}

TEST(ValidateImagePath, EmptyShoeboxLatticeAlwaysValid) {
  const Vec3 dims{4, 5, 3};
  const Scene s = make_shoebox(dims, Material(0.3, 0.0));
  RandomStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 src{rng.uniform(0.1, 3.9), rng.uniform(0.1, 4.9), rng.uniform(0.1, 2.9)};
    const Vec3 lst{rng.uniform(0.1, 3.9), rng.uniform(0.1, 4.9), rng.uniform(0.1, 2.9)};
    for (const ImageSource& img : enumerate_images_shoebox(dims, src, 4)) {
      const auto path = validate_image_path(s, img, lst);
      ASSERT_TRUE(path);
      EXPECT_EQ(path->size(), static_cast<std::size_t>(img.order));
      // Unfolded length equals the image distance.
      double len = 0.0;
      Vec3 from = src;
      for (const Vec3& p : *path) {
        len += distance(from, p);
        from = p;
      }
      len += distance(from, lst);
      EXPECT_NEAR(len, distance(img.position, lst), 1e-9);
    }
  }
}

TEST(ValidateImagePath, GenericShoeboxPathLengthsMatchDelays) {
  const Scene box = make_shoebox({4, 5, 3}, Material(0.3, 0.0));
  const Scene generic(box.triangles(), box.materials());
  const Vec3 src{1.2, 1.7, 1.1}, lst{3.1, 3.9, 1.6};
  const double fs = 16000, half_sample = 0.5 * kSpeedOfSound / fs;
  int valid = 0;
  for (const ImageSource& img : enumerate_images_generic(generic, src, 3)) {
    const auto path = validate_image_path(generic, img, lst);
    if (!path) continue;
    ++valid;
    double len = 0.0;
    Vec3 from = src;
    for (const Vec3& p : *path) {
      len += distance(from, p);
      from = p;
    }
    len += distance(from, lst);
    EXPECT_NEAR(len, distance(img.position, lst), half_sample);
  }
  // 1 + 6 + 18 + 38 lattice images up to order 3.
  EXPECT_EQ(valid, 63);
}

TEST(ValidateImagePath, ObstacleBlocksFirstOrderPath) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.0))
                      .with_obstacle({{1.4, 2, 0}, {1.6, 3, 1}}, 0);
  const Vec3 src{1, 2.5, 1.5}, lst{3, 2.5, 1.5};
  const auto images = enumerate_images_shoebox({4, 5, 3}, src, 1);
  const Vec3 floor_image{1, 2.5, -1.5};
  const Vec3 ceiling_image{1, 2.5, 4.5};
  int checked = 0;
  for (const ImageSource& img : images) {
    if (img.position == floor_image) {
      EXPECT_FALSE(validate_image_path(s, img, lst));
      // Independent confirmation: a ray from the source towards the floor
      // reflection point stops at the obstacle first.
      const Vec3 refl{2, 2.5, 0};
      const auto hit = s.intersect({src, normalized(refl - src)});
      ASSERT_TRUE(hit);
      EXPECT_LT(hit->distance, distance(src, refl) - 1e-6);
      ++checked;
    }
    if (img.position == ceiling_image) {
      EXPECT_TRUE(validate_image_path(s, img, lst));
      ++checked;
    }
  }
  EXPECT_EQ(checked, 2);
  EXPECT_TRUE(validate_image_path(s, images.front(), lst));
}

// Plane-then-inside-test intersection independent of the scene kernel.
std::optional<double> first_hit(const Scene& scene, const Vec3& o, const Vec3& d) {
  std::optional<double> best;
  for (const Triangle& t : scene.triangles()) {
    const Vec3 n = t.normal();
    const double denom = dot(n, d);
    if (std::abs(denom) < 1e-15) continue;
    const double dist = dot(t.vertices[0] - o, n) / denom;
    if (dist <= 0) continue;
    const Vec3 p = o + d * dist;
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
      const Vec3& a = t.vertices[k];
      const Vec3& b = t.vertices[(k + 1) % 3];
      if (dot(cross(b - a, p - a), n) < -1e-9) inside = false;
    }
    if (inside && (!best || dist < *best)) best = dist;
  }
  return best;
}

TEST(ValidateImagePath, ValidSegmentsDoNotPenetrateSurfaces) {
  const Scene s = make_shoebox({6, 5, 3}, Material(0.3, 0.0))
                      .with_obstacle({{2.5, 1.5, 0}, {3.5, 3.5, 1.2}}, 0)
                      .with_obstacle({{4.5, 0.5, 1}, {5, 1, 2.5}}, 0);
  RandomStream rng(12);
  int valid = 0, rejected = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 src, lst;
    do {
      src = {rng.uniform(0.2, 5.8), rng.uniform(0.2, 4.8), rng.uniform(0.2, 2.8)};
    } while (!s.is_interior(src));
    do {
      lst = {rng.uniform(0.2, 5.8), rng.uniform(0.2, 4.8), rng.uniform(0.2, 2.8)};
    } while (!s.is_interior(lst));
    for (const ImageSource& img : enumerate_images_shoebox({6, 5, 3}, src, 3)) {
      const auto path = validate_image_path(s, img, lst);
      if (!path) {
        ++rejected;
        continue;
      }
      ++valid;
      std::vector<Vec3> pts{src};
      pts.insert(pts.end(), path->begin(), path->end());
      pts.push_back(lst);
      for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double len = distance(pts[j], pts[j + 1]);
        const Vec3 dir = (pts[j + 1] - pts[j]) / len;
        const auto hit = first_hit(s, pts[j] + dir * 1e-6, dir);
        if (hit) {
          EXPECT_GE(*hit, len - 1e-5);
        }
      }
    }
  }
  EXPECT_GT(valid, 0);
  EXPECT_GT(rejected, 0);
}

TEST(ImageMethod, ReciprocityInEmptyShoebox) {
  const Vec3 dims{4, 5, 3};
  const std::array<double, 6> alpha = {0.1, 0.3, 0.2, 0.5, 0.4, 0.05};
  const Vec3 a{1.1, 1.3, 0.9}, b{3.2, 4.1, 2.2};
  const double fs = 16000;
  auto arrivals = [&](const Vec3& src, const Vec3& lst) {
    std::vector<std::pair<double, double>> out;
    for (const auto& img : enumerate_images_shoebox(dims, src, 6, alpha)) {
      out.emplace_back(distance(img.position, lst) / kSpeedOfSound * fs, img.gain);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
      const double kx = std::round(x.first * 1e6), ky = std::round(y.first * 1e6);
      return kx != ky ? kx < ky : x.second < y.second;
    });
    return out;
  };
  const auto ab = arrivals(a, b), ba = arrivals(b, a);
  ASSERT_EQ(ab.size(), ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_NEAR(ab[i].first, ba[i].first, 0.5);
    EXPECT_NEAR(ab[i].second, ba[i].second, 1e-6);
  }
}

// Band-limited reconstruction of h at fractional time t (in samples).
double sinc_interpolate(const std::vector<double>& h, double t) {
  double y = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double x = t - static_cast<double>(n);
    y += h[n] * (std::abs(x) < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x));
  }
  return y;
}

TEST(RenderImage, FreeFieldDirectArrival) {
  const Scene s = make_shoebox({8, 8, 8}, Material(0.99, 0.0));
  const Vec3 src{3, 4, 4}, rx{5, 4, 4};
  const double fs = 16000;
  const ImpulseResponse ir = render_ir_image(s, src, {rx}, 0, fs, 0.05);
  const auto& h = ir.channel(0);
  const double delay = 2.0 / kSpeedOfSound * fs;
  EXPECT_NEAR(delay, 93.29, 0.01);
  const auto peak = std::max_element(h.begin(), h.end(),
                                     [](double x, double y) { return std::abs(x) < std::abs(y); });
  EXPECT_EQ(peak - h.begin(), 93);
  const double expected = 1.0 / (8.0 * kPi);
  EXPECT_NEAR(sinc_interpolate(h, delay), expected, 0.02 * expected);
  EXPECT_LE(std::abs(*peak), expected * 1.0001);

  ImageRenderOptions nearest;
  nearest.fractional_delay = false;
  const auto hn = render_ir_image(s, src, {rx}, 0, fs, 0.05, nearest).channel(0);
  EXPECT_NEAR(hn[93], expected, 1e-15);
  EXPECT_EQ(std::count_if(hn.begin(), hn.end(), [](double v) { return v != 0.0; }), 1);
}

TEST(RenderImage, InverseDistanceAmplitude) {
  const Scene s = make_shoebox({8, 8, 8}, Material(0.99, 0.0));
  const Vec3 src{3, 4, 4};
  const double fs = 16000;
  const ImpulseResponse ir =
      render_ir_image(s, src, {{4, 4, 4}, {3, 6, 4}}, 0, fs, 0.05);
  const double a1 = sinc_interpolate(ir.channel(0), 1.0 / kSpeedOfSound * fs);
  const double a2 = sinc_interpolate(ir.channel(1), 2.0 / kSpeedOfSound * fs);
  EXPECT_NEAR(a1 / a2, 2.0, 0.02);
}

TEST(RenderImage, SabineRoomDecay) {
  const Vec3 dims{4, 5, 3};
  const Scene s = make_shoebox(dims, Material(sabine_absorption(dims, 0.3), 0.0));
  const ImpulseResponse ir =
      render_ir_image(s, {1.3, 1.8, 1.2}, {{2.9, 3.6, 1.5}}, 40, 16000, 0.6);
  const double t60 = estimate_t60(schroeder_edc(ir, 0));
  EXPECT_NEAR(t60, 0.3, 0.25 * 0.3);
}

TEST(RenderImage, LatticeAndGenericConstructionsAgree) {
  const Scene box = make_shoebox({4, 5, 3}, Material(0.25, 0.0));
  const Scene generic(box.triangles(), box.materials());
  ASSERT_FALSE(generic.shoebox_dims());
  const Vec3 src{1.2, 1.7, 1.1};
  const std::vector<Vec3> rx{{3.1, 3.9, 1.6}, {2.0, 4.2, 2.5}};
  const auto a = render_ir_image(box, src, rx, 3, 16000, 0.1);
  const auto b = render_ir_image(generic, src, rx, 3, 16000, 0.1);
  for (std::size_t c = 0; c < rx.size(); ++c) {
    for (std::size_t n = 0; n < a.length(); ++n) {
      EXPECT_NEAR(a.channel(c)[n], b.channel(c)[n], 1e-12);
    }
  }
}

TEST(RenderImage, WorkerCountDoesNotChangeOutput) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.0))
                      .with_obstacle({{1.5, 2, 0}, {2, 3, 1}}, 0);
  const std::vector<Vec3> rx = circular_array({3, 3.5, 1.2}, 0.035, 6, {0, 0, 1});
  ImageRenderOptions one, many;
  many.workers = 4;
  const auto a = render_ir_image(s, {1, 1, 1.5}, rx, 6, 16000, 0.3, one);
  const auto b = render_ir_image(s, {1, 1, 1.5}, rx, 6, 16000, 0.3, many);
  EXPECT_EQ(a.channels(), b.channels());
}

TEST(RenderImage, Errors) {
  const Scene s = make_shoebox({8, 10, 6}, Material(0.3, 0.0));
  try {
    render_ir_image(s, {1, 1, 1}, {{7, 9, 5}}, 1, 16000, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kIrTooShort);
  }
  EXPECT_THROW(render_ir_image(s, {1, 1, 1}, {{9, 9, 5}}, 1, 16000, 0.1), Error);
}

TEST(RenderImage, Metadata) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.0));
  const auto ir = render_ir_image(s, {1, 1, 1}, {{3, 3, 1}}, 2, 16000, 0.1);
  EXPECT_EQ(ir.metadata().engine, "image");
  EXPECT_EQ(ir.metadata().extra["max_order"], 2);
  EXPECT_EQ(ir.metadata().extra["n_candidates"], 25);
  EXPECT_EQ(ir.metadata().room_dims, (Vec3{4, 5, 3}));
}

TEST(DefaultImageOrder, CoversSixtyDecibels) {
  EXPECT_EQ(default_image_order({4, 5, 3}, 0.3), 35);
  EXPECT_EQ(default_image_order({8, 10, 6}, 0.05), 3);
}

}  // namespace
}  // namespace roomsim
