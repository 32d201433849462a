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

#include "crossvox/checkpoint.h"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "crossvox/common.h"

namespace crossvox {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'C', 'K'};
constexpr uint32_t kSupportedVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::string& buf, const void* p, size_t n) {
  buf.append(static_cast<const char*>(p), n);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  const std::string& path;

  void need(size_t n) const {
    if (pos + n > buf.size()) {
      throw FormatError("checkpoint: truncated file " + path);
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

const nn::Mat* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return &m;
  }
  return nullptr;
}

const nn::Mat& Checkpoint::require(const std::string& name) const {
  const nn::Mat* m = find(name);
  if (m == nullptr) throw FormatError("checkpoint: missing tensor " + name);
  return *m;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string payload;
  put_u32(payload, ckpt.version);
  put_u64(payload, ckpt.seed);
  put_u64(payload, static_cast<uint64_t>(ckpt.step));
  put_u32(payload, static_cast<uint32_t>(ckpt.kind.size()));
  payload += ckpt.kind;
  put_u32(payload, static_cast<uint32_t>(ckpt.config_json.size()));
  payload += ckpt.config_json;
  put_u32(payload, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, mat] : ckpt.tensors) {
    put_u32(payload, static_cast<uint32_t>(name.size()));
    payload += name;
    put_u32(payload, static_cast<uint32_t>(mat.rows));
    put_u32(payload, static_cast<uint32_t>(mat.cols));
    static_assert(sizeof(double) == 8);
    put_bytes(payload, mat.v.data(), mat.v.size() * sizeof(double));
  }
  const uint32_t crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  std::string tail;
  put_u32(tail, crc);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.write(tail.data(), static_cast<std::streamsize>(tail.size()));
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("checkpoint not found: " + path);
  std::string raw((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (raw.size() < 8 || std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic in " + path);
  }
  const std::string payload = raw.substr(4, raw.size() - 8);
  uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) {
    stored_crc |= static_cast<uint32_t>(static_cast<uint8_t>(raw[raw.size() - 4 + i])) << (8 * i);
  }
  const uint32_t crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));
  if (crc != stored_crc) {
    throw FormatError("checkpoint: checksum mismatch in " + path);
  }

  Reader r{payload, 0, path};
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kSupportedVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(ckpt.version) + " in " + path);
  }
  ckpt.seed = r.u64();
  ckpt.step = static_cast<int64_t>(r.u64());
  ckpt.kind = r.str(r.u32());
  ckpt.config_json = r.str(r.u32());
  const uint32_t n_tensors = r.u32();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = r.str(r.u32());
    const uint32_t rows = r.u32();
    const uint32_t cols = r.u32();
    nn::Mat m(static_cast<int>(rows), static_cast<int>(cols));
    const std::string bytes = r.str(static_cast<size_t>(rows) * cols * sizeof(double));
    std::memcpy(m.v.data(), bytes.data(), bytes.size());
    ckpt.tensors.emplace_back(name, std::move(m));
  }
  return ckpt;
}

uint64_t checkpoint_hash(const Checkpoint& ckpt) {
  std::string buf = ckpt.kind;
  for (const auto& [name, mat] : ckpt.tensors) {
    buf += name;
    buf.append(reinterpret_cast<const char*>(mat.v.data()),
               mat.v.size() * sizeof(double));
  }
  return fnv1a(buf);
}

}  // namespace crossvox
