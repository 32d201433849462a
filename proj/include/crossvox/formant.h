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

#ifndef CROSSVOX_FORMANT_H_
#define CROSSVOX_FORMANT_H_

#include "crossvox/wav.h"

namespace crossvox::dsp {

// Scales the spectral envelope by `factor` while keeping duration and median
// pitch: the signal is resampled by 1/factor (which transposes envelope and
// pitch together) and then pitch-synchronous overlap-add restores the
// original duration and pitch period. `median_pitch_hz` anchors the grain
// grid; pass 0 for unvoiced input, which falls back to a fixed 100 Hz grain
// grid so only the envelope scaling applies. factor must lie in [0.5, 2.0];
// factor == 1.0 returns the input samples unchanged.
Waveform change_formant(const Waveform& wav, double factor,
                        double median_pitch_hz);

}  // namespace crossvox::dsp

#endif  // CROSSVOX_FORMANT_H_
