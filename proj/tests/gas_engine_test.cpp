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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "roomsim/analysis.hpp"
#include "roomsim/gas_engine.hpp"
#include "roomsim/materials.hpp"
#include "roomsim/room_config.hpp"

namespace roomsim {
namespace {

TraceParams small_params(std::size_t rays = 20000) {
  TraceParams p;
  p.n_rays = rays;
  p.ir_length = 0.3;
  p.seed = 11;
  return p;
}

double band_sum(const EnergyHistogram& h, std::size_t r, std::size_t b = 0) {
  const auto bins = h.bins(r, b);
  return std::accumulate(bins.begin(), bins.end(), 0.0);
}

TEST(TraceParams, Validation) {
  TraceParams p;
  EXPECT_NO_THROW(p.validate());
  p.n_rays = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.receiver_radius = 0.3;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.n_bands = 3;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.ir_length = 0.5;
  p.fs = 16000;
  EXPECT_EQ(p.n_bins(), 8000u);
}

TEST(Trace, FullyAbsorbingRoomKeepsOnlyDirectPath) {
  const Scene s = make_shoebox({8, 8, 8}, Material(1.0, 0.0));
  const TraceStats stats = trace_with_stats(s, {3, 4, 4}, {{5, 4, 4}}, small_params()).stats;
  const EnergyHistogram h = trace(s, {3, 4, 4}, {{5, 4, 4}}, small_params());
  const auto bin = static_cast<std::size_t>(std::llround(2.0 / kSpeedOfSound * 16000));
  EXPECT_EQ(bin, 93u);
  EXPECT_NEAR(h.at(0, 0, bin), 1.0 / (16.0 * kPi), 1e-15);
  for (std::size_t n = 0; n < h.n_bins(); ++n) {
    if (n != bin) {
      EXPECT_EQ(h.at(0, 0, n), 0.0) << n;
    }
  }
  EXPECT_NEAR(stats.absorbed[0], 1.0, 1e-9);
  EXPECT_EQ(stats.deposited[0], 0.0);
}

TEST(Trace, StochasticDirectMatchesInverseSquare) {
  const Scene s = make_shoebox({8, 8, 8}, Material(1.0, 0.0));
  TraceParams p = small_params(200000);
  p.stochastic_direct = true;
  p.receiver_radius = 0.2;
  p.workers = 4;
  const EnergyHistogram h = trace(s, {4, 4, 4}, {{5, 4, 4}, {4, 6, 4}}, p);
  EXPECT_NEAR(band_sum(h, 0), 1.0 / (4 * kPi * 1.0), 0.03 / (4 * kPi * 1.0));
  EXPECT_NEAR(band_sum(h, 1), 1.0 / (4 * kPi * 4.0), 0.03 / (4 * kPi * 4.0));
}

TEST(Trace, FullyOccludedReceiverGetsNothing) {
  const Scene s = make_shoebox({6, 5, 3}, Material(0.2, 0.3))
                      .with_obstacle({{2.9, 0, 0}, {3.1, 5, 3}}, 0);
  const EnergyHistogram h = trace(s, {1, 2.5, 1.5}, {{5, 2.5, 1.5}}, small_params());
  for (double v : h.raw()) EXPECT_EQ(v, 0.0);
}

TEST(Trace, DeterministicForSeedAndWorkers) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.5));
  const std::vector<Vec3> rx = circular_array({2.5, 3, 1.3}, 0.035, 6, {0, 0, 1});
  TraceParams p = small_params(30000);
  const EnergyHistogram a = trace(s, {1, 1, 1}, rx, p);
  p.workers = 5;
  const EnergyHistogram b = trace(s, {1, 1, 1}, rx, p);
  EXPECT_TRUE(a == b);
  p.seed = 12;
  const EnergyHistogram c = trace(s, {1, 1, 1}, rx, p);
  EXPECT_FALSE(a == c);
}

TEST(Trace, EnergyDecreasesWithAbsorption) {
  const Vec3 src{1, 1.5, 1}, rx{3, 3.5, 1.6};
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0}) {
    const Scene s = make_shoebox({4, 5, 3}, Material(alpha, 0.5));
    const double total = band_sum(trace(s, src, {rx}, small_params()), 0);
    EXPECT_LT(total, prev) << alpha;
    prev = total;
  }
}

TEST(Trace, EnergyNeverCreated) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const RoomConfig c = sample_config(seed, 0);
    RandomStream rng(seed, {99});
    const Scene s = make_shoebox(c.room_dims_m,
                                 Material(rng.uniform(0.05, 1.0), rng.uniform()));
    TraceParams p = small_params(20000);
    p.receiver_radius = 0.05;
    p.seed = seed;
    const TraceStats st = trace_with_stats(s, c.source_m, {c.mics_m[0]}, p).stats;
    EXPECT_LE(st.absorbed[0], 1.0 + 1e-9);
    EXPECT_LE(st.deposited[0], 1.0 + 1e-9);
    EXPECT_GE(st.absorbed[0], 0.0);
  }
}

TEST(Trace, MultiBandHistogramMatchesBroadbandForFlatMaterial) {
  const Scene flat = make_shoebox({4, 5, 3}, Material::uniform(0.3, 0.5, 8));
  TraceParams p = small_params();
  p.n_bands = 8;
  const EnergyHistogram h = trace(flat, {1, 1, 1}, {{3, 3, 2}}, p);
  for (std::size_t b = 1; b < 8; ++b) {
    for (std::size_t n = 0; n < h.n_bins(); ++n) {
      EXPECT_NEAR(h.at(0, b, n), h.at(0, 0, n), 1e-12 * (1 + h.at(0, 0, n)));
    }
  }
}

TEST(Trace, Errors) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.5));
  try {
    trace(s, {1, 1, 1}, {{1.05, 1, 1}}, small_params());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateGeometry);
  }
  EXPECT_THROW(trace(s, {1, 1, 1}, {{5, 1, 1}}, small_params()), Error);
  EXPECT_THROW(trace(s, {-1, 1, 1}, {{2, 1, 1}}, small_params()), Error);
  EXPECT_THROW(trace(s, {1, 1, 1}, {}, small_params()), Error);
}

TEST(HistogramToIr, SingleBin) {
  TraceParams p;
  p.ir_length = 0.01;
  EnergyHistogram h(1, 1, p.n_bins(), p.fs);
  h.at(0, 0, 40) = 0.25;
  const ImpulseResponse ir = histogram_to_ir(h, p);
  const auto& x = ir.channel(0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (n == 40) {
      EXPECT_EQ(std::abs(x[n]), 0.5);
    } else {
      EXPECT_EQ(x[n], 0.0);
    }
  }
  EXPECT_EQ(ir.metadata().engine, "gas");
}

TEST(HistogramToIr, BroadbandPreservesEnergy) {
  const Scene s = make_shoebox({4, 5, 3}, Material(0.3, 0.5));
  const TraceParams p = small_params();
  const EnergyHistogram h = trace(s, {1, 1, 1}, {{3, 3, 2}, {2, 4, 1}}, p);
  const ImpulseResponse ir = histogram_to_ir(h, p);
  for (std::size_t r = 0; r < 2; ++r) {
    double e = 0.0;
    for (double v : ir.channel(r)) e += v * v;
    EXPECT_NEAR(e, band_sum(h, r), 1e-12 * band_sum(h, r));
    for (std::size_t n = 0; n < h.n_bins(); ++n) {
      EXPECT_NEAR(ir.channel(r)[n] * ir.channel(r)[n], h.at(r, 0, n),
                  1e-15 + 1e-12 * h.at(r, 0, n));
    }
  }
}

TEST(HistogramToIr, MultiBandIsDeterministic) {
  const Scene s = make_shoebox({4, 5, 3}, Material::uniform(0.3, 0.5, 8));
  TraceParams p = small_params(5000);
  p.n_bands = 8;
  const EnergyHistogram h = trace(s, {1, 1, 1}, {{3, 3, 2}}, p);
  const ImpulseResponse a = histogram_to_ir(h, p);
  const ImpulseResponse b = histogram_to_ir(h, p);
  EXPECT_EQ(a.channels(), b.channels());
  const double t60 = estimate_t60(schroeder_edc(a, 0));
  EXPECT_GT(t60, 0.1);
  EXPECT_LT(t60, 0.6);
}

TEST(HistogramToIr, BinCountMismatch) {
  TraceParams p;
  EnergyHistogram h(1, 1, 10, p.fs);
  EXPECT_THROW(histogram_to_ir(h, p), Error);
}

TEST(Trace, ReverberationTimeTracksSabine) {
  const Vec3 dims{4, 5, 3};
  const Scene s = make_shoebox(dims, Material(eyring_absorption(dims, 0.3), 0.5));
  TraceParams p = small_params(50000);
  p.ir_length = 0.6;
  p.workers = 4;
  const EnergyHistogram h = trace(s, {1.2, 1.5, 1.1}, {{2.8, 3.5, 1.6}}, p);
  const double t60 = estimate_t60(schroeder_edc(histogram_to_ir(h, p), 0));
  EXPECT_NEAR(t60, 0.3, 0.1 * 0.3);
}

}  // namespace
}  // namespace roomsim
