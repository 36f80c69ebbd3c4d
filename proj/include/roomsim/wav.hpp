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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "roomsim/error.hpp"

namespace roomsim {

struct WavData {
  std::vector<std::vector<double>> channels;
  double sample_rate = 0.0;
};

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// Writes a float32 WAV. The data goes to a temporary file that is renamed
// into place, so an interrupted write never leaves a truncated file behind.
inline void write_wav(const std::filesystem::path& path,
                      const std::vector<std::vector<double>>& channels,
                      double sample_rate) {
  require(!channels.empty(), "cannot write a WAV with no channels");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    require(ch.size() == frames, "WAV channels differ in length");
  }
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(frames * channels.size() * 4);
  std::string buf;
  buf.reserve(58 + data_bytes);
  buf += "RIFF";
  detail::put_u32(buf, 50 + data_bytes);
  buf += "WAVE";
  buf += "fmt ";
  detail::put_u32(buf, 18);
  detail::put_u16(buf, 3);  // IEEE float
  detail::put_u16(buf, n_ch);
  const auto rate = static_cast<std::uint32_t>(sample_rate);
  detail::put_u32(buf, rate);
  detail::put_u32(buf, rate * n_ch * 4);
  detail::put_u16(buf, static_cast<std::uint16_t>(n_ch * 4));
  detail::put_u16(buf, 32);
  detail::put_u16(buf, 0);
  buf += "fact";
  detail::put_u32(buf, 4);
  detail::put_u32(buf, static_cast<std::uint32_t>(frames));
  buf += "data";
  detail::put_u32(buf, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      const float f = static_cast<float>(ch[i]);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_u32(buf, bits);
    }
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::kIo, "cannot open " + tmp.string() + " for writing");
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(Errc::kIo, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::kIo, "cannot move WAV into place: " + path.string());
  }
}

// Reads PCM 16/24/32-bit integer or 32/64-bit float WAV files (including
// WAVE_FORMAT_EXTENSIBLE). Integer samples are scaled to [-1, 1).
inline WavData read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(Errc::kFormat, where + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, n_ch = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = detail::get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && std::memcmp(chunk, "data", 4) != 0) {
      fail(Errc::kFormat, where + ": truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(Errc::kFormat, where + ": short fmt chunk");
      format = detail::get_u16(bytes.data() + body);
      n_ch = detail::get_u16(bytes.data() + body + 2);
      rate = detail::get_u32(bytes.data() + body + 4);
      bits = detail::get_u16(bytes.data() + body + 14);
      if (format == 0xfffe && size >= 26) {
        format = detail::get_u16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      if (data_size != size) fail(Errc::kFormat, where + ": truncated data chunk");
      break;
    }
    pos = body + size + (size & 1);
  }
  if (n_ch == 0 || rate == 0) fail(Errc::kFormat, where + ": missing fmt chunk");
  if (data == nullptr) fail(Errc::kFormat, where + ": missing data chunk");
  const bool is_float = format == 3;
  if (!(format == 1 || is_float)) {
    fail(Errc::kFormat, where + ": unsupported WAV format " + std::to_string(format));
  }
  if ((is_float && bits != 32 && bits != 64) ||
      (!is_float && bits != 16 && bits != 24 && bits != 32)) {
    fail(Errc::kFormat, where + ": unsupported bit depth " + std::to_string(bits));
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * n_ch);
  WavData out;
  out.sample_rate = rate;
  out.channels.assign(n_ch, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      const unsigned char* p = data + (i * n_ch + c) * width;
      double v = 0.0;
      if (is_float && bits == 32) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (is_float) {
        std::memcpy(&v, p, 8);
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(detail::get_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(detail::get_u32(p)) / 2147483648.0;
      }
      out.channels[c][i] = v;
    }
  }
  return out;
}

// 16-bit PCM writer; used for test fixtures and interoperability.
inline void write_wav_pcm16(const std::filesystem::path& path,
                            const std::vector<std::vector<double>>& channels,
                            double sample_rate) {
  require(!channels.empty(), "cannot write a WAV with no channels");
  const std::size_t frames = channels.front().size();
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const auto data_bytes = static_cast<std::uint32_t>(frames * n_ch * 2);
  std::string buf;
  buf += "RIFF";
  detail::put_u32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  detail::put_u32(buf, 16);
  detail::put_u16(buf, 1);
  detail::put_u16(buf, n_ch);
  const auto rate = static_cast<std::uint32_t>(sample_rate);
  detail::put_u32(buf, rate);
  detail::put_u32(buf, rate * n_ch * 2);
  detail::put_u16(buf, static_cast<std::uint16_t>(n_ch * 2));
  detail::put_u16(buf, 16);
  buf += "data";
  detail::put_u32(buf, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      double v = ch[i] * 32768.0;
      v = v > 32767.0 ? 32767.0 : (v < -32768.0 ? -32768.0 : v);
      const auto s = static_cast<std::int16_t>(std::lrint(v));
      detail::put_u16(buf, static_cast<std::uint16_t>(s));
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(Errc::kIo, "cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) fail(Errc::kIo, "write failed: " + path.string());
}

}  // namespace roomsim
