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

#ifndef CROSSVOX_CHECKPOINT_H_
#define CROSSVOX_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crossvox/nn/mat.h"

namespace crossvox {

// Self-describing binary checkpoint: magic "CVCK", format version, training
// seed, a free-form JSON config string, named float64 tensors, and a CRC32
// over the payload. Loading verifies magic, version, and checksum.
struct Checkpoint {
  uint32_t version = 1;
  uint64_t seed = 0;
  int64_t step = 0;
  std::string kind;  // e.g. "codebook", "speaker_encoder", "txt2vec"
  std::string config_json;
  std::vector<std::pair<std::string, nn::Mat>> tensors;

  const nn::Mat* find(const std::string& name) const;
  const nn::Mat& require(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Stable content hash over kind + tensor names and bytes; used to verify that
// frozen prerequisite models are byte-identical to the ones trained earlier.
uint64_t checkpoint_hash(const Checkpoint& ckpt);

}  // namespace crossvox

#endif  // CROSSVOX_CHECKPOINT_H_
