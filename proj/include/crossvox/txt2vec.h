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

#ifndef CROSSVOX_TXT2VEC_H_
#define CROSSVOX_TXT2VEC_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossvox/checkpoint.h"
#include "crossvox/dsp.h"
#include "crossvox/nn/layers.h"

namespace crossvox::txt2vec {

// Prediction heads work in log space around fixed reference scales so all
// loss terms start near the same magnitude.
constexpr double kPitchRef = 150.0;   // Hz
constexpr double kEnergyRef = 0.05;   // rms
constexpr double kDurationRef = 6.0;  // frames

struct Txt2VecConfig {
  int phoneme_vocab = 32;
  int num_languages = 2;
  int unit_vocab = 64;
  int n_mels = 80;
  int d_model = 128;
  int heads = 4;
  int enc_blocks = 2;
  int ffn_dim = 256;
  int style_dim = 64;
  int style_heads = 2;
  int dec_blocks = 2;
  int dec_kernel = 3;
  double dropout = 0.1;
  uint64_t seed = 1;
};

std::string txt2vec_config_json(const Txt2VecConfig& cfg);
Txt2VecConfig txt2vec_config_from_json(const std::string& json_text);

// Frame-level discrete content representation plus the prosody needed to
// drive the second stage. All frame vectors share one length T.
struct UnitSequence {
  std::vector<int> units;
  std::vector<double> pitch_hz;
  std::vector<double> energy;
  std::vector<int> durations;  // frames per phoneme; sums to T
};

struct Txt2VecItem {
  std::vector<int> phonemes;
  int language = 0;
  std::vector<int> durations;       // effective frames per phoneme
  std::vector<int> units;           // length sum(durations)
  std::vector<double> pitch_tgt;    // per phoneme, log(f0 / kPitchRef)
  std::vector<double> energy_tgt;   // per phoneme, log(rms / kEnergyRef)
  dsp::MelSpectrogram ref_mel;      // clean reference mel driving the style M
};

struct Txt2VecLossParts {
  double total = 0.0;
  double unit_ce = 0.0;
  double pitch = 0.0;
  double energy = 0.0;
  double duration = 0.0;
};

class Txt2VecModel {
 public:
  explicit Txt2VecModel(const Txt2VecConfig& cfg);
  explicit Txt2VecModel(const Checkpoint& ckpt);

  const Txt2VecConfig& config() const { return cfg_; }
  nn::ParamRegistry& registry() { return *reg_; }
  Checkpoint to_checkpoint() const;

  // Phoneme + language-id encoder, L x d.
  nn::NodeP encode_phonemes(nn::Graph& g, const std::vector<int>& phonemes,
                            int language, double dropout_p,
                            uint64_t drop_seed) const;
  // Utterance-level style vector M from a reference mel, 1 x d.
  nn::NodeP mel_style_encode(nn::Graph& g, const dsp::MelSpectrogram& mel) const;

  struct Variances {
    nn::NodeP pitch;     // L x 1, log(f0 / kPitchRef)
    nn::NodeP energy;    // L x 1, log(rms / kEnergyRef)
    nn::NodeP duration;  // L x 1, log(frames / kDurationRef)
  };
  Variances predict_variances(nn::Graph& g, nn::NodeP fused) const;

  // Repeats row i of the phoneme-level sequence durations[i] times.
  nn::NodeP length_regulate(nn::Graph& g, nn::NodeP fused,
                            const std::vector<int>& durations) const;

  // Frame-level unit logits, T x unit_vocab. pitch_fr and energy_fr are
  // T x 1 log-space prosody tracks. The final projection starts at zero so
  // an untrained model yields uniform unit distributions.
  nn::NodeP decode_units(nn::Graph& g, nn::NodeP frames, nn::NodeP pitch_fr,
                         nn::NodeP energy_fr, double dropout_p,
                         uint64_t drop_seed) const;

 private:
  void build();

  Txt2VecConfig cfg_;
  std::unique_ptr<nn::ParamRegistry> reg_;
  nn::Embedding phon_emb_, lang_emb_;
  std::vector<nn::TransformerBlock> enc_blocks_;
  nn::Linear style_in_;
  nn::Conv1d style_conv_;
  nn::TransformerBlock style_block_;
  nn::Linear style_out_;
  nn::Conv1d var_pitch1_, var_pitch2_;
  nn::Conv1d var_energy1_, var_energy2_;
  nn::Conv1d var_dur1_, var_dur2_;
  nn::Linear var_pitch_out_, var_energy_out_, var_dur_out_;
  nn::Linear dec_in_;
  std::vector<nn::Conv1d> dec_convs_;
  std::vector<nn::LayerNorm> dec_norms_;
  nn::Linear dec_out_;
};

// Full training loss: unit cross-entropy plus MSE on the three variance
// heads, all against teacher-forced ground truth. crop_frames > 0 restricts
// the unit CE to a seeded window of that many frames.
nn::NodeP txt2vec_loss(const Txt2VecModel& model, nn::Graph& g,
                       const Txt2VecItem& item, bool train, uint64_t step_seed,
                       int crop_frames, Txt2VecLossParts* parts);

UnitSequence txt2vec_infer(const Txt2VecModel& model,
                           const std::vector<int>& phonemes, int language,
                           const dsp::MelSpectrogram& ref_mel);

}  // namespace crossvox::txt2vec

#endif  // CROSSVOX_TXT2VEC_H_
