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

#include "crossvox/pipeline.h"

#include "crossvox/common.h"

namespace crossvox::pipeline {

SynthResult synthesize(const txt2vec::Txt2VecModel& t2v,
                       const vec2wav::Vec2WavModel& v2w,
                       const SynthInputs& in) {
  if (in.phonemes.empty()) throw ParamError("synthesize: empty phoneme sequence");
  SynthResult res;
  res.units = txt2vec::txt2vec_infer(t2v, in.phonemes, in.language, in.style_mel);

  vec2wav::Vec2WavItem item;
  item.units = res.units.units;
  item.pitch_hz = res.units.pitch_hz;
  item.energy = res.units.energy;
  item.speaker_id = in.speaker_id;
  item.emo_emb = in.emo_emb;
  res.wav = v2w.infer(item);
  return res;
}

}  // namespace crossvox::pipeline
