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

#ifndef CROSSVOX_CONFIG_H_
#define CROSSVOX_CONFIG_H_

#include <cstdint>
#include <string>

#include "crossvox/corpus.h"
#include "crossvox/encoders.h"
#include "crossvox/perturb.h"
#include "crossvox/training.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"

namespace crossvox::config {

// Whole-pipeline configuration. One seed and one set of analysis settings
// rule every stage; fields that must agree across modules (vocabulary sizes,
// sample rate, hop, mel bands, embedding dims) are derived, not repeated, so
// they cannot drift. Unknown JSON keys are rejected.
struct GlobalConfig {
  uint64_t seed = 1;
  int sample_rate = 16000;
  int n_fft = 1024;
  int hop = 256;
  int win = 1024;
  int n_mels = 80;

  struct Paths {
    std::string work_dir = "work";
    // Empty entries resolve to conventional names under work_dir.
    std::string corpus_dir;
    std::string perturb_dir;
    std::string codebook;
    std::string speaker_encoder;
    std::string emotion_encoder;
    std::string txt2vec;
    std::string vec2wav;
    std::string report_dir;
  } paths;

  corpus::CorpusConfig corpus;
  perturb::PerturbationSpec perturbation;

  struct CodebookParams {
    int k = 64;
    int max_frames_per_utt = 20;
    int restarts = 6;
    int max_iters = 40;
  } codebook;

  encoders::EncoderConfig encoder;  // num_classes and seed set per role
  txt2vec::Txt2VecConfig txt2vec_model;
  vec2wav::Vec2WavConfig vec2wav_model;
  training::TrainConfig txt2vec_train;
  training::TrainConfig vec2wav_train;
};

// Parses, fills derived fields and default paths, and validates; throws
// ConfigError on unknown keys, bad types, or incoherent values.
GlobalConfig global_config_from_json(const std::string& json_text);
GlobalConfig load_global_config(const std::string& path);

// Resolved (post-derivation) snapshot, sorted keys, suitable for echoing.
std::string global_config_json(const GlobalConfig& cfg);

// Re-derives dependent fields (default paths, single-source values, per-stage
// seeds) and validates; call after overriding seed or paths.
void finalize_global_config(GlobalConfig& cfg);

void validate_global_config(const GlobalConfig& cfg);

}  // namespace crossvox::config

#endif  // CROSSVOX_CONFIG_H_
