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

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roomsim/analysis.hpp"
#include "roomsim/error.hpp"
#include "roomsim/impulse_response.hpp"

namespace roomsim {

struct ChannelReport {
  std::size_t index = 0;
  std::size_t channel = 0;
  std::optional<double> t60_s;
  std::string t60_error;
  double drr_db = 0.0;
  RegionEnergy energy;
  Segmentation segmentation;
  EnergyDecayCurve edc;
};

// Analysis of every channel. A channel whose decay is too shallow for a T30
// fit keeps its other figures and carries the error text instead of a T60.
inline std::vector<ChannelReport> analyze_channels(const ImpulseResponse& ir,
                                                   std::size_t index = 0) {
  std::vector<ChannelReport> out;
  for (std::size_t c = 0; c < ir.n_channels(); ++c) {
    ChannelReport r;
    r.index = index;
    r.channel = c;
    r.edc = schroeder_edc(ir, c);
    try {
      r.t60_s = estimate_t60(r.edc);
    } catch (const Error& e) {
      if (e.code() != Errc::kInsufficientDecay) throw;
      r.t60_error = e.what();
    }
    r.segmentation = segment_ir(ir, c);
    r.energy = region_energy(ir, c, r.segmentation);
    r.drr_db = direct_to_reverberant_ratio(ir, c, r.segmentation);
    out.push_back(std::move(r));
  }
  return out;
}

// JSON has no infinities; they are written as the strings "inf"/"-inf".
inline nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr double kEdcReportStepS = 0.001;

inline nlohmann::json to_json(const ChannelReport& r) {
  const double total = r.energy.total();
  auto share = [&](double e) { return total > 0.0 ? e / total : 0.0; };
  nlohmann::json edc = nlohmann::json::array();
  const auto step = static_cast<std::size_t>(
      std::max(1.0, std::round(kEdcReportStepS * r.edc.sample_rate)));
  for (std::size_t i = 0; i < r.edc.db.size(); i += step) {
    edc.push_back(r.edc.db[i]);
  }
  nlohmann::json j = {{"index", r.index},
                      {"channel", r.channel},
                      {"t60_s", r.t60_s ? nlohmann::json(*r.t60_s) : nlohmann::json()},
                      {"drr_db", json_number(r.drr_db)},
                      {"direct_e", r.energy.direct},
                      {"early_e", r.energy.early},
                      {"late_e", r.energy.late},
                      {"direct_share", share(r.energy.direct)},
                      {"early_share", share(r.energy.early)},
                      {"late_share", share(r.energy.late)},
                      {"direct_arrival", r.segmentation.direct_arrival},
                      {"direct_end", r.segmentation.direct_end},
                      {"early_end", r.segmentation.early_end},
                      {"edc_step_s", static_cast<double>(step) / r.edc.sample_rate},
                      {"edc_db", edc}};
  if (!r.t60_error.empty()) j["t60_error"] = r.t60_error;
  return j;
}

inline constexpr const char* kCsvHeader =
    "index,channel,t60_s,drr_db,direct_e,early_e,late_e";

inline std::string csv_row(const ChannelReport& r) {
  std::string s = std::to_string(r.index) + "," + std::to_string(r.channel) +
                  ",";
  s += r.t60_s ? format_number(*r.t60_s) : "nan";
  s += "," + format_number(r.drr_db) + "," + format_number(r.energy.direct) +
       "," + format_number(r.energy.early) + "," +
       format_number(r.energy.late);
  return s;
}

// EDC plot of all channels of one IR, -60..0 dB against time.
inline std::string edc_svg(const std::vector<ChannelReport>& channels,
                           const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 30,
                   kBottom = 45, kMinDb = -60.0;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#17becf",
                                            "#8c564b", "#7f7f7f"};
  double duration = 0.0;
  for (const ChannelReport& c : channels) {
    duration = std::max(duration, static_cast<double>(c.edc.db.size()) /
                                      c.edc.sample_rate);
  }
  if (duration <= 0.0) duration = 1.0;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double t) { return kLeft + pw * t / duration; };
  auto py = [&](double db) {
    return kTop + ph * (std::max(db, kMinDb) / kMinDb);
  };
  char buf[160];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (int db = 0; db >= -60; db -= 10) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"#dddddd\"/>\n",
                  kLeft, py(db), kLeft + pw, py(db));
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" "
                  "font-family=\"sans-serif\" font-size=\"11\">%d</text>\n",
                  kLeft - 6, py(db) + 4, db);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" "
                "font-family=\"sans-serif\" font-size=\"12\">time (s), "
                "0 to %.3f</text>\n",
                kLeft + pw / 2, kH - 12, duration);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"14\" y=\"%.1f\" font-family=\"sans-serif\" "
                "font-size=\"12\" transform=\"rotate(-90 14 %.1f)\" "
                "text-anchor=\"middle\">EDC (dB)</text>\n",
                kTop + ph / 2, kTop + ph / 2);
  os << buf;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const ChannelReport& c = channels[k];
    const std::size_t n = c.edc.db.size();
    const std::size_t step = std::max<std::size_t>(1, n / 400);
    os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\""
       << kColors[k % std::size(kColors)] << "\" points=\"";
    for (std::size_t i = 0; i < n; i += step) {
      std::snprintf(buf, sizeof(buf), "%s%.1f,%.1f", i == 0 ? "" : " ",
                    px(static_cast<double>(i) / c.edc.sample_rate),
                    py(c.edc.db[i]));
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace roomsim
