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

#ifndef CROSSVOX_VEC2WAV_H_
#define CROSSVOX_VEC2WAV_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossvox/checkpoint.h"
#include "crossvox/encoders.h"
#include "crossvox/nn/layers.h"
#include "crossvox/wav.h"

namespace crossvox::vec2wav {

struct Vec2WavConfig {
  int unit_vocab = 64;
  int num_speakers = 4;
  int d_model = 128;
  int spk_dim = 64;
  int emo_dim = 64;
  int dec_blocks = 3;
  int dec_kernel = 3;
  std::vector<int> up_factors = {4, 4, 4, 4};
  std::vector<int> up_channels = {64, 32, 16, 8};
  int final_kernel = 9;
  int sample_rate = 16000;
  int hop = 256;  // must equal the product of up_factors
  int n_mels = 80;
  int n_fft = 1024;
  int win = 1024;
  double mel_weight = 1.0;
  double stft_weight = 1.0;
  double scl_alpha = 1.0;  // 0 disables the consistency term
  // When set, the speaker condition is an externally supplied spk_dim vector
  // (e.g. a speaker-encoder embedding) instead of a learned id lookup.
  bool external_speaker = false;
  uint64_t seed = 1;
};

std::string vec2wav_config_json(const Vec2WavConfig& cfg);
Vec2WavConfig vec2wav_config_from_json(const std::string& json_text);

// One training example: unit/prosody tracks of T frames plus the clean
// target waveform of exactly T * hop samples.
struct Vec2WavItem {
  std::vector<int> units;
  std::vector<double> pitch_hz;
  std::vector<double> energy;
  int speaker_id = 0;
  std::vector<double> spk_emb;  // external_speaker mode only
  std::vector<double> emo_emb;
  std::vector<double> target;
};

struct Vec2WavLossParts {
  double total = 0.0;
  double mel_l1 = 0.0;
  double mr_stft = 0.0;
  double scl = 0.0;
};

class Vec2WavModel {
 public:
  explicit Vec2WavModel(const Vec2WavConfig& cfg);
  explicit Vec2WavModel(const Checkpoint& ckpt);

  const Vec2WavConfig& config() const { return cfg_; }
  nn::ParamRegistry& registry() { return *reg_; }
  Checkpoint to_checkpoint() const;

  nn::NodeP speaker_condition(nn::Graph& g, const Vec2WavItem& item) const;
  nn::NodeP emotion_condition(nn::Graph& g, const Vec2WavItem& item) const;

  // Frame-level decoder: unit embeddings fused with log-space prosody,
  // conv blocks each followed by speaker-emotion adaptive normalization.
  nn::NodeP frame_decode(nn::Graph& g, const std::vector<int>& units,
                         const std::vector<double>& pitch_hz,
                         const std::vector<double>& energy, nn::NodeP spk,
                         nn::NodeP emo) const;

  // Transposed-conv upsampling to sample rate; a deterministic sine
  // excitation built from the pitch track joins before the output convs.
  // Returns a (T * hop) x 1 waveform in (-1, 1).
  nn::NodeP generate_waveform(nn::Graph& g, nn::NodeP frame_feat,
                              const std::vector<double>& pitch_hz) const;

  Waveform infer(const Vec2WavItem& item) const;

 private:
  void build();

  Vec2WavConfig cfg_;
  std::unique_ptr<nn::ParamRegistry> reg_;
  nn::Embedding unit_emb_;
  nn::Embedding spk_table_;
  nn::Linear spk_proj_;  // external_speaker mode
  nn::Linear emo_proj_;
  nn::Linear dec_in_;
  std::vector<nn::Conv1d> dec_convs_;
  std::vector<nn::Sealn> dec_sealn_;
  std::vector<nn::TConv1d> ups_;
  nn::Conv1d post1_, post2_;
};

// Speaker-consistency loss on embeddings: -(alpha / n) * sum cos(g_i, h_i),
// cosines clamped to [-1, 1]. The graph variant backpropagates through the
// generated waveforms into the generator; phi itself must be frozen.
double scl_value(const std::vector<std::vector<double>>& gen_emb,
                 const std::vector<std::vector<double>>& gt_emb, double alpha);
nn::NodeP scl_loss_graph(nn::Graph& g, const std::vector<nn::NodeP>& gen_wavs,
                         const std::vector<const Waveform*>& gt_wavs,
                         const encoders::ClassifierEncoder& phi, double alpha,
                         int sample_rate);

// Full second-stage loss for one item: mel L1 + multi-resolution STFT
// (log-magnitude L1 + spectral convergence) + SCL.
nn::NodeP vec2wav_loss(const Vec2WavModel& model, nn::Graph& g,
                       const Vec2WavItem& item,
                       const encoders::ClassifierEncoder* phi,
                       Vec2WavLossParts* parts);

}  // namespace crossvox::vec2wav

#endif  // CROSSVOX_VEC2WAV_H_
