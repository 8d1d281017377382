// Copyright 2026 The bsmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bsmkit/scene.hpp"

namespace bsm {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

WavFormat wav_format_from_string(const std::string& s) {
  if (s == "pcm16") return WavFormat::kPcm16;
  if (s == "pcm24") return WavFormat::kPcm24;
  if (s == "f32" || s == "float32") return WavFormat::kFloat32;
  throw Error(ErrorCode::kInvalidArgument, "unknown WAV format '" + s + "'");
}

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kSchemaUnknown, path + " is not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::size_t len = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > buf.size()) {
      if (std::memcmp(chunk, "data", 4) != 0) break;
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0 && len >= 16) {
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible && len >= 40) format = read_u16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = std::min(len, buf.size() - body);
    }
    pos = body + len + (len & 1);
  }
  if (!data || channels == 0 || rate == 0) {
    throw Error(ErrorCode::kSchemaUnknown, path + " lacks fmt or data chunk");
  }
  const bool pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  const bool flt = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!pcm && !flt) {
    throw Error(ErrorCode::kSchemaUnknown, "unsupported WAV encoding in " + path);
  }
  const std::size_t bytes = bits / 8;
  const std::size_t frames = data_len / (bytes * channels);
  WavData w;
  w.sample_rate = static_cast<int>(rate);
  w.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * bytes;
      double v = 0.0;
      if (flt && bits == 32) {
        v = std::bit_cast<float>(read_u32(p));
      } else if (flt) {
        const std::uint64_t u = read_u32(p) | (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
        v = std::bit_cast<double>(u);
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
      }
      w.channels[c][i] = v;
    }
  }
  return w;
}

void write_wav(const std::string& path, const WavData& data, WavFormat format) {
  const auto channels = static_cast<std::uint16_t>(data.channels.size());
  if (channels == 0) throw Error(ErrorCode::kInvalidArgument, "no channels to write");
  const std::size_t frames = data.channels[0].size();
  for (const auto& ch : data.channels) {
    if (ch.size() != frames) throw Error(ErrorCode::kDimsMismatch, "channel lengths differ");
  }
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : format == WavFormat::kPcm24 ? 24 : 32;
  const std::uint16_t tag = format == WavFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t block = channels * bits / 8u;
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * block);

  std::string s;
  s.reserve(44 + data_len);
  s += "RIFF";
  put_u32(s, 36 + data_len);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, tag);
  put_u16(s, channels);
  put_u32(s, static_cast<std::uint32_t>(data.sample_rate));
  put_u32(s, static_cast<std::uint32_t>(data.sample_rate) * block);
  put_u16(s, static_cast<std::uint16_t>(block));
  put_u16(s, bits);
  s += "data";
  put_u32(s, data_len);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : data.channels) {
      const double x = ch[i];
      const double v = std::isfinite(x) ? std::clamp(x, -2.0, 2.0) : 0.0;
      if (format == WavFormat::kFloat32) {
        put_u32(s, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      } else if (format == WavFormat::kPcm16) {
        const auto q = static_cast<std::int32_t>(std::clamp(std::lround(v * 32768.0), -32768L, 32767L));
        put_u16(s, static_cast<std::uint16_t>(q));
      } else {
        const auto q = static_cast<std::int32_t>(std::clamp(std::lround(v * 8388608.0), -8388608L, 8388607L));
        for (int b = 0; b < 3; ++b) s.push_back(static_cast<char>((q >> (8 * b)) & 0xFF));
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace bsm
