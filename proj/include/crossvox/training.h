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

#ifndef CROSSVOX_TRAINING_H_
#define CROSSVOX_TRAINING_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crossvox/codebook.h"
#include "crossvox/dsp.h"
#include "crossvox/encoders.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"
#include "crossvox/wav.h"

namespace crossvox::training {

struct TrainConfig {
  int steps = 300;
  int batch = 4;
  double lr = 1e-3;
  int crop_frames = 48;  // first-stage unit-CE window, 0 = full sequence
  int seg_frames = 24;   // second-stage training segment, 0 = full utterance
  int log_every = 10;
  uint64_t seed = 1;
};

std::string train_config_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& json_text);

// Everything both stages consume for one utterance. Unit, pitch, and energy
// tracks come from the unit-stream (R) perturbation; the style mel and the
// waveform target stay clean; the emotion embedding comes from the
// emotion-stream (E) perturbation.
struct UtteranceFeatures {
  std::string utterance_id;
  int speaker_id = 0;
  int emotion_id = 0;
  int language_id = 0;
  std::vector<int> phonemes;
  std::vector<int> durations;  // effective frames per phoneme
  dsp::MelSpectrogram clean_mel;
  Waveform clean;
  std::vector<int> units;
  std::vector<double> pitch_fr;   // Hz per frame, unvoiced filled with median
  std::vector<double> energy_fr;  // rms per frame
  std::vector<double> emo_emb;    // empty when no emotion encoder is given
};

std::vector<UtteranceFeatures> prepare_features(
    const std::string& manifest_path, const std::string& pairs_path,
    const codebook::Codebook& cb,
    const encoders::ClassifierEncoder* emotion_encoder);

// Pooled unit-stream mel frames for codebook fitting; per utterance at most
// max_frames_per_utt evenly spaced frames are kept.
nn::Mat collect_unit_features(const std::string& manifest_path,
                              const std::string& pairs_path,
                              int max_frames_per_utt, int n_mels = 80);

enum class LabelKind { kSpeaker, kEmotion };
enum class AudioStream { kClean, kUnitStream, kEmotionStream };

// Labeled mels for classifier-encoder training and probing. pairs_path may
// be empty for the clean stream.
std::vector<encoders::LabeledMel> labeled_mels(const std::string& manifest_path,
                                               const std::string& pairs_path,
                                               LabelKind label,
                                               AudioStream stream,
                                               int n_mels = 80);

// Frame tracks reduced to per-phoneme log-space targets. Pitch averages
// voiced frames within each phoneme span, falling back to the track median.
std::vector<double> phoneme_pitch_targets(const std::vector<double>& pitch_fr,
                                          const std::vector<int>& durations);
std::vector<double> phoneme_energy_targets(const std::vector<double>& energy_fr,
                                           const std::vector<int>& durations);
std::vector<double> fill_unvoiced(const std::vector<double>& f0,
                                  double fallback);

txt2vec::Txt2VecItem to_txt2vec_item(const UtteranceFeatures& f);
vec2wav::Vec2WavItem to_vec2wav_item(const UtteranceFeatures& f);

// Frame-window crop: units/pitch/energy rows [t0, t0 + frames) and the
// matching target samples.
vec2wav::Vec2WavItem crop_vec2wav_item(const vec2wav::Vec2WavItem& full, int t0,
                                       int frames);

struct StepRecord {
  int64_t step = 0;  // 1-based, after the optimizer update
  double total = 0.0;
  std::vector<std::pair<std::string, double>> parts;
};

struct TrainResult {
  std::vector<StepRecord> log;  // one record per optimizer step
};

// Mean total over the first / last n logged steps.
double mean_total_head(const TrainResult& r, size_t n);
double mean_total_tail(const TrainResult& r, size_t n);

// Runs Adam for cfg.steps steps with seeded batch sampling. When resume_from
// is set, parameters, optimizer moments, and the step counter are restored
// and training continues to cfg.steps; the result then covers only the new
// steps. log_path (optional) receives one JSON line per log_every steps;
// ckpt_path (optional) receives the final checkpoint with optimizer state.
TrainResult train_txt2vec(txt2vec::Txt2VecModel& model,
                          const std::vector<txt2vec::Txt2VecItem>& items,
                          const TrainConfig& cfg, const std::string& log_path,
                          const std::string& ckpt_path,
                          const std::string& resume_from = "");

// Same contract for the second stage. phi (optional) is the frozen loss
// network; training refuses to start if any of its parameters is trainable
// and verifies its weights are byte-identical before and after the run.
TrainResult train_vec2wav(vec2wav::Vec2WavModel& model,
                          const std::vector<vec2wav::Vec2WavItem>& items,
                          const encoders::ClassifierEncoder* phi,
                          const TrainConfig& cfg, const std::string& log_path,
                          const std::string& ckpt_path,
                          const std::string& resume_from = "");

}  // namespace crossvox::training

#endif  // CROSSVOX_TRAINING_H_
