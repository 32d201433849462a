// Copyright (c) 2026 crossvox project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crossvox/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "crossvox/common.h"

namespace crossvox {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 44 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path);

  // Walk chunks; require a PCM16 mono fmt chunk before data.
  size_t pos = 12;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format_tag = 0;
  uint32_t sample_rate = 0;
  Waveform wav;
  while (pos + 8 <= n) {
    const char* id = bytes.data() + pos;
    uint32_t size = read_u32(p + pos + 4);
    pos += 8;
    if (pos + size > n) throw FormatError("truncated chunk in wav file: " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too small: " + path);
      format_tag = read_u16(p + pos);
      channels = read_u16(p + pos + 2);
      sample_rate = read_u32(p + pos + 4);
      bits = read_u16(p + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk: " + path);
      if (format_tag != 1)
        throw FormatError("unsupported format tag " + std::to_string(format_tag) +
                          " (want PCM=1): " + path);
      if (channels != 1)
        throw FormatError("unsupported channel count " + std::to_string(channels) +
                          " (want mono=1): " + path);
      if (bits != 16)
        throw FormatError("unsupported bits per sample " + std::to_string(bits) +
                          " (want 16): " + path);
      const size_t count = size / 2;
      wav.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        int16_t s = static_cast<int16_t>(read_u16(p + pos + 2 * i));
        wav.samples[i] = static_cast<double>(s) / 32768.0;
      }
      wav.sample_rate = static_cast<int>(sample_rate);
      return wav;
    }
    pos += size + (size & 1);
  }
  throw FormatError("no data chunk in wav file: " + path);
}

void save_wav(const std::string& path, const Waveform& wav) {
  if (wav.sample_rate <= 0) throw ParamError("save_wav: sample_rate must be positive");
  std::string out;
  const uint32_t data_size = static_cast<uint32_t>(wav.samples.size() * 2);
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<uint32_t>(wav.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_size);
  for (double s : wav.samples) {
    double clamped = std::clamp(s, -1.0, 1.0);
    int v = static_cast<int>(std::lround(clamped * 32767.0));
    v = std::clamp(v, -32768, 32767);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write: " + path);
}

}  // namespace crossvox
