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

#ifndef CROSSVOX_PIPELINE_H_
#define CROSSVOX_PIPELINE_H_

#include <vector>

#include "crossvox/dsp.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"
#include "crossvox/wav.h"

namespace crossvox::pipeline {

// End-to-end synthesis request: content as phoneme ids, a style mel (usually
// the emotion reference's) driving the first stage, the emotion embedding
// conditioning the second stage, and the target speaker id.
struct SynthInputs {
  std::vector<int> phonemes;
  int language = 0;
  dsp::MelSpectrogram style_mel;
  std::vector<double> emo_emb;
  int speaker_id = 0;
};

struct SynthResult {
  Waveform wav;
  txt2vec::UnitSequence units;  // intermediate representation, for metrics
};

SynthResult synthesize(const txt2vec::Txt2VecModel& t2v,
                       const vec2wav::Vec2WavModel& v2w,
                       const SynthInputs& in);

}  // namespace crossvox::pipeline

#endif  // CROSSVOX_PIPELINE_H_
