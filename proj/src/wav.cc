// Copyright 2026 The itdsim Authors.
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

#include "itdsim/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "itdsim/error.h"

namespace itdsim {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file: " + path.string());
  const std::vector<unsigned char> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " (" + path.string() + ")";

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file" + where);
  }

  Format fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error("truncated fmt chunk" + where);
      }
      const unsigned char* f = bytes.data() + body;
      fmt.tag = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.sample_rate = read_u32(f + 4);
      fmt.block_align = read_u16(f + 12);
      fmt.bits = read_u16(f + 14);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40) throw Error("truncated extensible fmt chunk" + where);
        fmt.tag = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) {
        throw Error("truncated data chunk" + where);
      }
      data = bytes.data() + body;
      data_size = size;
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw Error("missing fmt chunk" + where);
  if (!have_data) throw Error("missing data chunk" + where);
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw Error("unsupported channel count " + std::to_string(fmt.channels) +
                " (1 or 2 supported)" + where);
  }
  const bool pcm16 = fmt.tag == kFormatPcm && fmt.bits == 16;
  const bool pcm24 = fmt.tag == kFormatPcm && fmt.bits == 24;
  const bool f32 = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !pcm24 && !f32) {
    throw Error("unsupported encoding: format tag " + std::to_string(fmt.tag) +
                ", " + std::to_string(fmt.bits) +
                " bits (16/24-bit PCM or 32-bit float supported)" + where);
  }
  if (fmt.sample_rate == 0) throw Error("zero sample rate" + where);
  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame = bytes_per_sample * fmt.channels;
  if (data_size == 0) throw Error("empty data" + where);
  if (data_size % frame != 0) throw Error("truncated sample frame" + where);

  const std::size_t frames = data_size / frame;
  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.channels.assign(fmt.channels, Trace(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const unsigned char* s = data + n * frame + c * bytes_per_sample;
      double v = 0.0;
      if (pcm16) {
        v = static_cast<std::int16_t>(read_u16(s)) / 32768.0;
      } else if (pcm24) {
        std::int32_t raw = s[0] | (s[1] << 8) | (s[2] << 16);
        if (raw & 0x800000) raw -= 0x1000000;
        v = raw / 8388608.0;
      } else {
        v = std::bit_cast<float>(read_u32(s));
      }
      clip.channels[c][n] = v;
    }
  }
  clip.validate();
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding) {
  clip.validate();
  const std::uint16_t bits = encoding == WavEncoding::kPcm16   ? 16
                             : encoding == WavEncoding::kPcm24 ? 24
                                                               : 32;
  const std::uint16_t channels = static_cast<std::uint16_t>(clip.channels.size());
  const std::uint16_t block_align = channels * (bits / 8);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(clip.num_samples() * block_align);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);

  for (std::size_t n = 0; n < clip.num_samples(); ++n) {
    for (const Trace& ch : clip.channels) {
      const double v = ch[n];
      if (encoding == WavEncoding::kPcm16) {
        const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
      } else if (encoding == WavEncoding::kPcm24) {
        const double s =
            std::clamp(std::round(v * 8388608.0), -8388608.0, 8388607.0);
        const auto raw = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
        out.push_back(raw & 0xFF);
        out.push_back((raw >> 8) & 0xFF);
        out.push_back((raw >> 16) & 0xFF);
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      }
    }
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
}

}  // namespace itdsim
