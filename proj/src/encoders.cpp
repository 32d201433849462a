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

#include "crossvox/encoders.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "crossvox/common.h"
#include "crossvox/nn/optim.h"

namespace crossvox::encoders {

using nlohmann::json;

std::string encoder_config_json(const EncoderConfig& cfg) {
  json j;
  j["n_mels"] = cfg.n_mels;
  j["channels"] = cfg.channels;
  j["kernel"] = cfg.kernel;
  j["emb_dim"] = cfg.emb_dim;
  j["num_classes"] = cfg.num_classes;
  j["lr"] = cfg.lr;
  j["steps"] = cfg.steps;
  j["batch"] = cfg.batch;
  j["seed"] = cfg.seed;
  return j.dump();
}

EncoderConfig encoder_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("encoder config: bad JSON: ") + e.what());
  }
  EncoderConfig cfg;
  cfg.n_mels = j.value("n_mels", cfg.n_mels);
  cfg.channels = j.value("channels", cfg.channels);
  cfg.kernel = j.value("kernel", cfg.kernel);
  cfg.emb_dim = j.value("emb_dim", cfg.emb_dim);
  cfg.num_classes = j.value("num_classes", cfg.num_classes);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.batch = j.value("batch", cfg.batch);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

ClassifierEncoder::ClassifierEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
  if (cfg_.num_classes < 2) throw ConfigError("encoder: num_classes must be >= 2");
  if (cfg_.n_mels < 1 || cfg_.channels < 1 || cfg_.emb_dim < 1) {
    throw ConfigError("encoder: non-positive dimension");
  }
  build();
}

ClassifierEncoder::ClassifierEncoder(const Checkpoint& ckpt)
    : cfg_(encoder_config_from_json(ckpt.config_json)) {
  build();
  for (const auto& p : reg_->params()) {
    const nn::Mat& stored = ckpt.require(p->name());
    if (!stored.same_shape(p->value())) {
      throw FormatError("encoder: tensor shape mismatch for " + p->name());
    }
    p->value() = stored;
  }
}

void ClassifierEncoder::build() {
  reg_ = std::make_unique<nn::ParamRegistry>(cfg_.seed);
  conv1_ = nn::Conv1d(*reg_, "conv1", cfg_.n_mels, cfg_.channels, cfg_.kernel);
  conv2_ = nn::Conv1d(*reg_, "conv2", cfg_.channels, cfg_.channels, cfg_.kernel);
  fc_emb_ = nn::Linear(*reg_, "fc_emb", cfg_.channels, cfg_.emb_dim);
  fc_out_ = nn::Linear(*reg_, "fc_out", cfg_.emb_dim, cfg_.num_classes);
}

nn::NodeP ClassifierEncoder::embed_graph(nn::Graph& g, nn::NodeP mel) const {
  nn::NodeP h = g.relu(conv1_.forward(g, mel));
  h = g.relu(conv2_.forward(g, h));
  h = g.mean_rows(h);
  return g.tanh_op(fc_emb_.forward(g, h));
}

nn::NodeP ClassifierEncoder::logits_graph(nn::Graph& g, nn::NodeP emb) const {
  return fc_out_.forward(g, emb);
}

std::vector<double> ClassifierEncoder::embed(const dsp::MelSpectrogram& mel) const {
  nn::Graph g;
  nn::NodeP in = g.input(nn::mat_from(mel.frames, mel.n_frames, mel.n_mels));
  nn::NodeP emb = embed_graph(g, in);
  return emb->val.v;
}

std::vector<double> ClassifierEncoder::embed(const Waveform& wav) const {
  dsp::MelConfig mcfg;
  mcfg.n_mels = cfg_.n_mels;
  return embed(dsp::mel_spectrogram(wav, mcfg));
}

int ClassifierEncoder::classify(const dsp::MelSpectrogram& mel) const {
  nn::Graph g;
  nn::NodeP in = g.input(nn::mat_from(mel.frames, mel.n_frames, mel.n_mels));
  nn::NodeP logits = logits_graph(g, embed_graph(g, in));
  int best = 0;
  for (int j = 1; j < logits->val.cols; ++j) {
    if (logits->val.at(0, j) > logits->val.at(0, best)) best = j;
  }
  return best;
}

Checkpoint ClassifierEncoder::to_checkpoint(const std::string& kind) const {
  Checkpoint ckpt;
  ckpt.kind = kind;
  ckpt.seed = cfg_.seed;
  ckpt.config_json = encoder_config_json(cfg_);
  for (const auto& p : reg_->params()) {
    ckpt.tensors.emplace_back(p->name(), p->value());
  }
  return ckpt;
}

double train_encoder(ClassifierEncoder& enc, const std::vector<LabeledMel>& data,
                     const EncoderConfig& cfg) {
  if (data.empty()) throw ParamError("train_encoder: empty dataset");
  for (const LabeledMel& item : data) {
    if (item.label < 0 || item.label >= cfg.num_classes) {
      throw ParamError("train_encoder: label out of range");
    }
  }
  nn::Adam opt(enc.registry(), cfg.lr);
  const int n = static_cast<int>(data.size());
  for (int step = 0; step < cfg.steps; ++step) {
    Rng rng(derive_seed(cfg.seed, "enc-batch#" + std::to_string(step)));
    enc.registry().zero_grad();
    nn::Graph g;
    nn::NodeP total = nullptr;
    for (int b = 0; b < cfg.batch; ++b) {
      const LabeledMel& item = data[static_cast<size_t>(rng.randint(0, n - 1))];
      nn::NodeP in = g.input(
          nn::mat_from(item.mel.frames, item.mel.n_frames, item.mel.n_mels));
      nn::NodeP logits = enc.logits_graph(g, enc.embed_graph(g, in));
      nn::NodeP loss = g.softmax_xent(logits, {item.label});
      total = total == nullptr ? loss : g.add(total, loss);
    }
    total = g.scale(total, 1.0 / cfg.batch);
    g.backward(total);
    opt.step();
  }
  return encoder_accuracy(enc, data);
}

double encoder_accuracy(const ClassifierEncoder& enc,
                        const std::vector<LabeledMel>& data) {
  if (data.empty()) return 0.0;
  int hits = 0;
  for (const LabeledMel& item : data) {
    if (enc.classify(item.mel) == item.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw ParamError("cosine: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::max(std::sqrt(na) * std::sqrt(nb), 1e-12);
  return std::clamp(dot / denom, -1.0, 1.0);
}

}  // namespace crossvox::encoders
