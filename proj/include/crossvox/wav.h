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

#ifndef CROSSVOX_WAV_H_
#define CROSSVOX_WAV_H_

#include <string>
#include <vector>

namespace crossvox {

// Mono PCM audio in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF PCM16 mono little-endian file. Anything else (stereo, float,
// compressed) is rejected with a FormatError naming the offending field.
Waveform load_wav(const std::string& path);

// Writes RIFF PCM16 mono. Samples are clamped to [-1, 1] and rounded;
// save followed by load is exact up to the 16-bit quantization step.
void save_wav(const std::string& path, const Waveform& wav);

}  // namespace crossvox

#endif  // CROSSVOX_WAV_H_
