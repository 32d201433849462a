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

#include "crossvox/txt2vec.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "crossvox/common.h"

namespace crossvox::txt2vec {

using nlohmann::json;

std::string txt2vec_config_json(const Txt2VecConfig& cfg) {
  json j;
  j["phoneme_vocab"] = cfg.phoneme_vocab;
  j["num_languages"] = cfg.num_languages;
  j["unit_vocab"] = cfg.unit_vocab;
  j["n_mels"] = cfg.n_mels;
  j["d_model"] = cfg.d_model;
  j["heads"] = cfg.heads;
  j["enc_blocks"] = cfg.enc_blocks;
  j["ffn_dim"] = cfg.ffn_dim;
  j["style_dim"] = cfg.style_dim;
  j["style_heads"] = cfg.style_heads;
  j["dec_blocks"] = cfg.dec_blocks;
  j["dec_kernel"] = cfg.dec_kernel;
  j["dropout"] = cfg.dropout;
  j["seed"] = cfg.seed;
  return j.dump();
}

Txt2VecConfig txt2vec_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("txt2vec config: bad JSON: ") + e.what());
  }
  Txt2VecConfig cfg;
  cfg.phoneme_vocab = j.value("phoneme_vocab", cfg.phoneme_vocab);
  cfg.num_languages = j.value("num_languages", cfg.num_languages);
  cfg.unit_vocab = j.value("unit_vocab", cfg.unit_vocab);
  cfg.n_mels = j.value("n_mels", cfg.n_mels);
  cfg.d_model = j.value("d_model", cfg.d_model);
  cfg.heads = j.value("heads", cfg.heads);
  cfg.enc_blocks = j.value("enc_blocks", cfg.enc_blocks);
  cfg.ffn_dim = j.value("ffn_dim", cfg.ffn_dim);
  cfg.style_dim = j.value("style_dim", cfg.style_dim);
  cfg.style_heads = j.value("style_heads", cfg.style_heads);
  cfg.dec_blocks = j.value("dec_blocks", cfg.dec_blocks);
  cfg.dec_kernel = j.value("dec_kernel", cfg.dec_kernel);
  cfg.dropout = j.value("dropout", cfg.dropout);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

Txt2VecModel::Txt2VecModel(const Txt2VecConfig& cfg) : cfg_(cfg) {
  if (cfg_.phoneme_vocab < 1 || cfg_.num_languages < 1 || cfg_.unit_vocab < 2) {
    throw ConfigError("txt2vec: bad vocabulary sizes");
  }
  if (cfg_.d_model < cfg_.heads || cfg_.d_model % cfg_.heads != 0) {
    throw ConfigError("txt2vec: d_model must be divisible by heads");
  }
  build();
}

Txt2VecModel::Txt2VecModel(const Checkpoint& ckpt)
    : cfg_(txt2vec_config_from_json(ckpt.config_json)) {
  if (ckpt.kind != "txt2vec") {
    throw FormatError("txt2vec: checkpoint kind is '" + ckpt.kind + "'");
  }
  build();
  for (const auto& p : reg_->params()) {
    const nn::Mat& stored = ckpt.require(p->name());
    if (!stored.same_shape(p->value())) {
      throw FormatError("txt2vec: tensor shape mismatch for " + p->name());
    }
    p->value() = stored;
  }
}

void Txt2VecModel::build() {
  reg_ = std::make_unique<nn::ParamRegistry>(cfg_.seed);
  nn::ParamRegistry& r = *reg_;
  phon_emb_ = nn::Embedding(r, "phon_emb", cfg_.phoneme_vocab, cfg_.d_model);
  lang_emb_ = nn::Embedding(r, "lang_emb", cfg_.num_languages, cfg_.d_model);
  enc_blocks_.clear();
  for (int i = 0; i < cfg_.enc_blocks; ++i) {
    enc_blocks_.emplace_back(r, "enc" + std::to_string(i), cfg_.d_model,
                             cfg_.heads, cfg_.ffn_dim);
  }
  style_in_ = nn::Linear(r, "style_in", cfg_.n_mels, cfg_.style_dim);
  style_conv_ = nn::Conv1d(r, "style_conv", cfg_.style_dim, cfg_.style_dim, 5);
  style_block_ = nn::TransformerBlock(r, "style_block", cfg_.style_dim,
                                      cfg_.style_heads, 2 * cfg_.style_dim);
  style_out_ = nn::Linear(r, "style_out", cfg_.style_dim, cfg_.d_model);

  const int d = cfg_.d_model, k = cfg_.dec_kernel;
  var_pitch1_ = nn::Conv1d(r, "var_pitch1", d, d, k);
  var_pitch2_ = nn::Conv1d(r, "var_pitch2", d, d, k);
  var_energy1_ = nn::Conv1d(r, "var_energy1", d, d, k);
  var_energy2_ = nn::Conv1d(r, "var_energy2", d, d, k);
  var_dur1_ = nn::Conv1d(r, "var_dur1", d, d, k);
  var_dur2_ = nn::Conv1d(r, "var_dur2", d, d, k);
  var_pitch_out_ = nn::Linear(r, "var_pitch_out", d, 1);
  var_energy_out_ = nn::Linear(r, "var_energy_out", d, 1);
  var_dur_out_ = nn::Linear(r, "var_dur_out", d, 1);

  dec_in_ = nn::Linear(r, "dec_in", d + 2, d);
  dec_convs_.clear();
  dec_norms_.clear();
  for (int i = 0; i < cfg_.dec_blocks; ++i) {
    dec_convs_.emplace_back(r, "dec_conv" + std::to_string(i), d, d, k);
    dec_norms_.emplace_back(r, "dec_ln" + std::to_string(i), d);
  }
  dec_out_ = nn::Linear(r, "dec_out", d, cfg_.unit_vocab,
                        nn::ParamRegistry::Init::kZeros);
}

Checkpoint Txt2VecModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "txt2vec";
  ckpt.seed = cfg_.seed;
  ckpt.config_json = txt2vec_config_json(cfg_);
  for (const auto& p : reg_->params()) {
    ckpt.tensors.emplace_back(p->name(), p->value());
  }
  return ckpt;
}

nn::NodeP Txt2VecModel::encode_phonemes(nn::Graph& g,
                                        const std::vector<int>& phonemes,
                                        int language, double dropout_p,
                                        uint64_t drop_seed) const {
  if (phonemes.empty()) throw ParamError("txt2vec: empty phoneme sequence");
  if (language < 0 || language >= cfg_.num_languages) {
    throw ParamError("txt2vec: language id out of range");
  }
  for (int p : phonemes) {
    if (p < 0 || p >= cfg_.phoneme_vocab) {
      throw ParamError("txt2vec: phoneme id out of range");
    }
  }
  nn::NodeP h = phon_emb_.forward(g, phonemes);
  nn::NodeP lang = lang_emb_.forward(g, {language});
  h = g.add_rowvec(h, lang);
  h = g.add(h, g.input(nn::positional_encoding(static_cast<int>(phonemes.size()),
                                               cfg_.d_model)));
  for (size_t i = 0; i < enc_blocks_.size(); ++i) {
    h = enc_blocks_[i].forward(g, h, dropout_p,
                               mix64(drop_seed ^ (0xe0c0 + i)));
  }
  return h;
}

nn::NodeP Txt2VecModel::mel_style_encode(nn::Graph& g,
                                         const dsp::MelSpectrogram& mel) const {
  if (mel.n_mels != cfg_.n_mels) {
    throw ParamError("txt2vec: reference mel dimension mismatch");
  }
  nn::NodeP x = g.input(nn::mat_from(mel.frames, mel.n_frames, mel.n_mels));
  nn::NodeP h = g.relu(style_in_.forward(g, x));
  h = g.relu(style_conv_.forward(g, h));
  h = style_block_.forward(g, h, 0.0, 0);
  h = g.mean_rows(h);
  return g.tanh_op(style_out_.forward(g, h));
}

Txt2VecModel::Variances Txt2VecModel::predict_variances(nn::Graph& g,
                                                        nn::NodeP fused) const {
  auto head = [&](const nn::Conv1d& c1, const nn::Conv1d& c2,
                  const nn::Linear& out) {
    nn::NodeP h = g.relu(c1.forward(g, fused));
    h = g.relu(c2.forward(g, h));
    return out.forward(g, h);
  };
  Variances v;
  v.pitch = head(var_pitch1_, var_pitch2_, var_pitch_out_);
  v.energy = head(var_energy1_, var_energy2_, var_energy_out_);
  v.duration = head(var_dur1_, var_dur2_, var_dur_out_);
  return v;
}

nn::NodeP Txt2VecModel::length_regulate(nn::Graph& g, nn::NodeP fused,
                                        const std::vector<int>& durations) const {
  if (static_cast<int>(durations.size()) != fused->val.rows) {
    throw ParamError("length_regulate: one duration per phoneme required");
  }
  std::vector<int> idx;
  for (size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 1) throw ParamError("length_regulate: duration < 1");
    for (int t = 0; t < durations[i]; ++t) idx.push_back(static_cast<int>(i));
  }
  return g.rows_gather(fused, std::move(idx));
}

nn::NodeP Txt2VecModel::decode_units(nn::Graph& g, nn::NodeP frames,
                                     nn::NodeP pitch_fr, nn::NodeP energy_fr,
                                     double dropout_p, uint64_t drop_seed) const {
  if (pitch_fr->val.rows != frames->val.rows ||
      energy_fr->val.rows != frames->val.rows || pitch_fr->val.cols != 1 ||
      energy_fr->val.cols != 1) {
    throw ParamError("decode_units: prosody tracks must be T x 1");
  }
  nn::NodeP x = g.concat_cols(g.concat_cols(frames, pitch_fr), energy_fr);
  nn::NodeP h = g.relu(dec_in_.forward(g, x));
  for (size_t i = 0; i < dec_convs_.size(); ++i) {
    nn::NodeP c = g.relu(dec_convs_[i].forward(g, h));
    if (dropout_p > 0.0) c = g.dropout(c, dropout_p, mix64(drop_seed ^ (0xdec0 + i)));
    h = dec_norms_[i].forward(g, g.add(h, c));
  }
  return dec_out_.forward(g, h);
}

nn::NodeP txt2vec_loss(const Txt2VecModel& model, nn::Graph& g,
                       const Txt2VecItem& item, bool train, uint64_t step_seed,
                       int crop_frames, Txt2VecLossParts* parts) {
  const size_t n_ph = item.phonemes.size();
  if (item.durations.size() != n_ph || item.pitch_tgt.size() != n_ph ||
      item.energy_tgt.size() != n_ph) {
    throw ParamError("txt2vec_loss: per-phoneme arrays disagree in length");
  }
  int total_frames = 0;
  for (int d : item.durations) total_frames += d;
  if (static_cast<int>(item.units.size()) != total_frames) {
    throw ParamError("txt2vec_loss: unit track must match total duration");
  }

  const double drop = train ? model.config().dropout : 0.0;
  nn::NodeP enc = model.encode_phonemes(g, item.phonemes, item.language, drop,
                                        mix64(step_seed ^ 0xabc1));
  nn::NodeP style = model.mel_style_encode(g, item.ref_mel);
  nn::NodeP fused = g.add_rowvec(enc, style);

  Txt2VecModel::Variances var = model.predict_variances(g, fused);
  std::vector<double> dur_tgt(n_ph);
  for (size_t i = 0; i < n_ph; ++i) {
    dur_tgt[i] = std::log(item.durations[i] / kDurationRef);
  }
  nn::NodeP pitch_loss = g.mse_loss(
      var.pitch, g.input(nn::mat_col(item.pitch_tgt)));
  nn::NodeP energy_loss = g.mse_loss(
      var.energy, g.input(nn::mat_col(item.energy_tgt)));
  nn::NodeP dur_loss = g.mse_loss(var.duration, g.input(nn::mat_col(dur_tgt)));

  // Teacher-forced frame prosody for the unit decoder.
  std::vector<double> pitch_fr, energy_fr;
  for (size_t i = 0; i < n_ph; ++i) {
    for (int t = 0; t < item.durations[i]; ++t) {
      pitch_fr.push_back(item.pitch_tgt[i]);
      energy_fr.push_back(item.energy_tgt[i]);
    }
  }
  nn::NodeP frames = model.length_regulate(g, fused, item.durations);
  std::vector<int> unit_tgt = item.units;
  nn::NodeP pf = g.input(nn::mat_col(pitch_fr));
  nn::NodeP ef = g.input(nn::mat_col(energy_fr));
  if (crop_frames > 0 && total_frames > crop_frames) {
    Rng crop_rng(mix64(step_seed ^ 0xc409));
    const int t0 = static_cast<int>(crop_rng.randint(0, total_frames - crop_frames));
    frames = g.slice_rows(frames, t0, t0 + crop_frames);
    pf = g.slice_rows(pf, t0, t0 + crop_frames);
    ef = g.slice_rows(ef, t0, t0 + crop_frames);
    unit_tgt.assign(item.units.begin() + t0, item.units.begin() + t0 + crop_frames);
  }
  nn::NodeP logits =
      model.decode_units(g, frames, pf, ef, drop, mix64(step_seed ^ 0xabc2));
  nn::NodeP ce = g.softmax_xent(logits, unit_tgt);

  nn::NodeP total = g.add(g.add(ce, pitch_loss), g.add(energy_loss, dur_loss));
  if (parts != nullptr) {
    parts->total = total->val.at(0, 0);
    parts->unit_ce = ce->val.at(0, 0);
    parts->pitch = pitch_loss->val.at(0, 0);
    parts->energy = energy_loss->val.at(0, 0);
    parts->duration = dur_loss->val.at(0, 0);
  }
  return total;
}

UnitSequence txt2vec_infer(const Txt2VecModel& model,
                           const std::vector<int>& phonemes, int language,
                           const dsp::MelSpectrogram& ref_mel) {
  nn::Graph g;
  nn::NodeP enc = model.encode_phonemes(g, phonemes, language, 0.0, 0);
  nn::NodeP style = model.mel_style_encode(g, ref_mel);
  nn::NodeP fused = g.add_rowvec(enc, style);
  Txt2VecModel::Variances var = model.predict_variances(g, fused);

  UnitSequence seq;
  const int n_ph = static_cast<int>(phonemes.size());
  seq.durations.resize(static_cast<size_t>(n_ph));
  std::vector<double> pitch_fr, energy_fr;
  for (int i = 0; i < n_ph; ++i) {
    const double d = kDurationRef * std::exp(var.duration->val.at(i, 0));
    seq.durations[static_cast<size_t>(i)] =
        std::clamp(static_cast<int>(std::lround(d)), 1, 64);
    for (int t = 0; t < seq.durations[static_cast<size_t>(i)]; ++t) {
      pitch_fr.push_back(var.pitch->val.at(i, 0));
      energy_fr.push_back(var.energy->val.at(i, 0));
      seq.pitch_hz.push_back(kPitchRef * std::exp(var.pitch->val.at(i, 0)));
      seq.energy.push_back(kEnergyRef * std::exp(var.energy->val.at(i, 0)));
    }
  }

  nn::NodeP frames = model.length_regulate(g, fused, seq.durations);
  nn::NodeP logits = model.decode_units(g, frames, g.input(nn::mat_col(pitch_fr)),
                                        g.input(nn::mat_col(energy_fr)), 0.0, 0);
  seq.units.resize(static_cast<size_t>(logits->val.rows));
  for (int t = 0; t < logits->val.rows; ++t) {
    int best = 0;
    for (int j = 1; j < logits->val.cols; ++j) {
      if (logits->val.at(t, j) > logits->val.at(t, best)) best = j;
    }
    seq.units[static_cast<size_t>(t)] = best;
  }
  return seq;
}

}  // namespace crossvox::txt2vec
