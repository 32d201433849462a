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

#ifndef CROSSVOX_ENCODERS_H_
#define CROSSVOX_ENCODERS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossvox/checkpoint.h"
#include "crossvox/dsp.h"
#include "crossvox/nn/layers.h"
#include "crossvox/wav.h"

namespace crossvox::encoders {

struct EncoderConfig {
  int n_mels = 80;
  int channels = 32;
  int kernel = 5;
  int emb_dim = 64;
  int num_classes = 2;
  double lr = 2e-3;
  int steps = 300;
  int batch = 8;
  uint64_t seed = 1;
};

std::string encoder_config_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const std::string& json_text);

// Mel-input classifier whose tanh-bounded penultimate activations serve as
// the embedding space. The speaker instance is the frozen phi used by the
// consistency loss and SECS; the emotion instance provides the E vectors and
// EECS.
class ClassifierEncoder {
 public:
  explicit ClassifierEncoder(const EncoderConfig& cfg);
  explicit ClassifierEncoder(const Checkpoint& ckpt);

  // mel (T x n_mels, differentiable) -> 1 x emb_dim.
  nn::NodeP embed_graph(nn::Graph& g, nn::NodeP mel) const;
  // 1 x emb_dim -> 1 x num_classes.
  nn::NodeP logits_graph(nn::Graph& g, nn::NodeP emb) const;

  std::vector<double> embed(const dsp::MelSpectrogram& mel) const;
  std::vector<double> embed(const Waveform& wav) const;
  int classify(const dsp::MelSpectrogram& mel) const;

  const EncoderConfig& config() const { return cfg_; }
  nn::ParamRegistry& registry() { return *reg_; }
  const nn::ParamRegistry& registry() const { return *reg_; }
  void freeze() { reg_->freeze(); }

  Checkpoint to_checkpoint(const std::string& kind) const;

 private:
  void build();

  EncoderConfig cfg_;
  std::unique_ptr<nn::ParamRegistry> reg_;
  nn::Conv1d conv1_, conv2_;
  nn::Linear fc_emb_, fc_out_;
};

struct LabeledMel {
  dsp::MelSpectrogram mel;
  int label = 0;
};

// Trains the classifier with Adam on mean cross-entropy over seeded batches.
// Returns the final training-set accuracy.
double train_encoder(ClassifierEncoder& enc, const std::vector<LabeledMel>& data,
                     const EncoderConfig& cfg);

double encoder_accuracy(const ClassifierEncoder& enc,
                        const std::vector<LabeledMel>& data);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace crossvox::encoders

#endif  // CROSSVOX_ENCODERS_H_
