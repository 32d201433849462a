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

#include "crossvox/vec2wav.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "crossvox/common.h"
#include "crossvox/dsp.h"
#include "crossvox/txt2vec.h"

namespace crossvox::vec2wav {

using nlohmann::json;

namespace {

struct StftRes {
  int n_fft;
  int hop;
  int win;
};
constexpr StftRes kStftResolutions[3] = {{512, 128, 512}, {1024, 256, 1024},
                                         {2048, 512, 2048}};

std::vector<double> log_pitch(const std::vector<double>& pitch_hz) {
  std::vector<double> out(pitch_hz.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(std::max(pitch_hz[i], 1.0) / txt2vec::kPitchRef);
  }
  return out;
}

std::vector<double> log_energy(const std::vector<double>& energy) {
  std::vector<double> out(energy.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(std::max(energy[i], 1e-4) / txt2vec::kEnergyRef);
  }
  return out;
}

}  // namespace

std::string vec2wav_config_json(const Vec2WavConfig& cfg) {
  json j;
  j["unit_vocab"] = cfg.unit_vocab;
  j["num_speakers"] = cfg.num_speakers;
  j["d_model"] = cfg.d_model;
  j["spk_dim"] = cfg.spk_dim;
  j["emo_dim"] = cfg.emo_dim;
  j["dec_blocks"] = cfg.dec_blocks;
  j["dec_kernel"] = cfg.dec_kernel;
  j["up_factors"] = cfg.up_factors;
  j["up_channels"] = cfg.up_channels;
  j["final_kernel"] = cfg.final_kernel;
  j["sample_rate"] = cfg.sample_rate;
  j["hop"] = cfg.hop;
  j["n_mels"] = cfg.n_mels;
  j["n_fft"] = cfg.n_fft;
  j["win"] = cfg.win;
  j["mel_weight"] = cfg.mel_weight;
  j["stft_weight"] = cfg.stft_weight;
  j["scl_alpha"] = cfg.scl_alpha;
  j["external_speaker"] = cfg.external_speaker;
  j["seed"] = cfg.seed;
  return j.dump();
}

Vec2WavConfig vec2wav_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("vec2wav config: bad JSON: ") + e.what());
  }
  Vec2WavConfig cfg;
  cfg.unit_vocab = j.value("unit_vocab", cfg.unit_vocab);
  cfg.num_speakers = j.value("num_speakers", cfg.num_speakers);
  cfg.d_model = j.value("d_model", cfg.d_model);
  cfg.spk_dim = j.value("spk_dim", cfg.spk_dim);
  cfg.emo_dim = j.value("emo_dim", cfg.emo_dim);
  cfg.dec_blocks = j.value("dec_blocks", cfg.dec_blocks);
  cfg.dec_kernel = j.value("dec_kernel", cfg.dec_kernel);
  cfg.up_factors = j.value("up_factors", cfg.up_factors);
  cfg.up_channels = j.value("up_channels", cfg.up_channels);
  cfg.final_kernel = j.value("final_kernel", cfg.final_kernel);
  cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
  cfg.hop = j.value("hop", cfg.hop);
  cfg.n_mels = j.value("n_mels", cfg.n_mels);
  cfg.n_fft = j.value("n_fft", cfg.n_fft);
  cfg.win = j.value("win", cfg.win);
  cfg.mel_weight = j.value("mel_weight", cfg.mel_weight);
  cfg.stft_weight = j.value("stft_weight", cfg.stft_weight);
  cfg.scl_alpha = j.value("scl_alpha", cfg.scl_alpha);
  cfg.external_speaker = j.value("external_speaker", cfg.external_speaker);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

Vec2WavModel::Vec2WavModel(const Vec2WavConfig& cfg) : cfg_(cfg) {
  if (cfg_.up_factors.size() != cfg_.up_channels.size() || cfg_.up_factors.empty()) {
    throw ConfigError("vec2wav: up_factors and up_channels must align");
  }
  int prod = 1;
  for (int f : cfg_.up_factors) prod *= f;
  if (prod != cfg_.hop) {
    throw ConfigError("vec2wav: product of up_factors must equal hop");
  }
  if (cfg_.final_kernel % 2 == 0) {
    throw ConfigError("vec2wav: final_kernel must be odd");
  }
  if (cfg_.num_speakers < 1) throw ConfigError("vec2wav: num_speakers must be >= 1");
  build();
}

Vec2WavModel::Vec2WavModel(const Checkpoint& ckpt)
    : cfg_(vec2wav_config_from_json(ckpt.config_json)) {
  if (ckpt.kind != "vec2wav") {
    throw FormatError("vec2wav: checkpoint kind is '" + ckpt.kind + "'");
  }
  build();
  for (const auto& p : reg_->params()) {
    const nn::Mat& stored = ckpt.require(p->name());
    if (!stored.same_shape(p->value())) {
      throw FormatError("vec2wav: tensor shape mismatch for " + p->name());
    }
    p->value() = stored;
  }
}

void Vec2WavModel::build() {
  reg_ = std::make_unique<nn::ParamRegistry>(cfg_.seed);
  nn::ParamRegistry& r = *reg_;
  const int d = cfg_.d_model;
  unit_emb_ = nn::Embedding(r, "unit_emb", cfg_.unit_vocab, d);
  spk_table_ = nn::Embedding(r, "spk_table", cfg_.num_speakers, cfg_.spk_dim);
  spk_proj_ = nn::Linear(r, "spk_proj", cfg_.spk_dim, cfg_.spk_dim);
  emo_proj_ = nn::Linear(r, "emo_proj", cfg_.emo_dim, cfg_.emo_dim);
  dec_in_ = nn::Linear(r, "dec_in", d + 2, d);
  dec_convs_.clear();
  dec_sealn_.clear();
  for (int i = 0; i < cfg_.dec_blocks; ++i) {
    dec_convs_.emplace_back(r, "dec_conv" + std::to_string(i), d, d,
                            cfg_.dec_kernel);
    dec_sealn_.emplace_back(r, "dec_sealn" + std::to_string(i), d, cfg_.spk_dim,
                            cfg_.emo_dim);
  }
  ups_.clear();
  int in_ch = d;
  for (size_t i = 0; i < cfg_.up_factors.size(); ++i) {
    ups_.emplace_back(r, "up" + std::to_string(i), in_ch,
                      cfg_.up_channels[i], cfg_.up_factors[i]);
    in_ch = cfg_.up_channels[i];
  }
  post1_ = nn::Conv1d(r, "post1", in_ch + 1, in_ch, cfg_.final_kernel);
  post2_ = nn::Conv1d(r, "post2", in_ch, 1, cfg_.final_kernel);
}

Checkpoint Vec2WavModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "vec2wav";
  ckpt.seed = cfg_.seed;
  ckpt.config_json = vec2wav_config_json(cfg_);
  for (const auto& p : reg_->params()) {
    ckpt.tensors.emplace_back(p->name(), p->value());
  }
  return ckpt;
}

nn::NodeP Vec2WavModel::speaker_condition(nn::Graph& g,
                                          const Vec2WavItem& item) const {
  if (cfg_.external_speaker) {
    if (static_cast<int>(item.spk_emb.size()) != cfg_.spk_dim) {
      throw ParamError("vec2wav: external speaker embedding has wrong size");
    }
    return g.tanh_op(spk_proj_.forward(
        g, g.input(nn::mat_from(item.spk_emb, 1, cfg_.spk_dim))));
  }
  if (item.speaker_id < 0 || item.speaker_id >= cfg_.num_speakers) {
    throw ParamError("vec2wav: speaker id out of range");
  }
  return spk_table_.forward(g, {item.speaker_id});
}

nn::NodeP Vec2WavModel::emotion_condition(nn::Graph& g,
                                          const Vec2WavItem& item) const {
  if (static_cast<int>(item.emo_emb.size()) != cfg_.emo_dim) {
    throw ParamError("vec2wav: emotion embedding has wrong size");
  }
  return g.tanh_op(emo_proj_.forward(
      g, g.input(nn::mat_from(item.emo_emb, 1, cfg_.emo_dim))));
}

nn::NodeP Vec2WavModel::frame_decode(nn::Graph& g, const std::vector<int>& units,
                                     const std::vector<double>& pitch_hz,
                                     const std::vector<double>& energy,
                                     nn::NodeP spk, nn::NodeP emo) const {
  if (units.empty() || units.size() != pitch_hz.size() ||
      units.size() != energy.size()) {
    throw ParamError("vec2wav: unit/pitch/energy tracks must share one length");
  }
  for (int u : units) {
    if (u < 0 || u >= cfg_.unit_vocab) throw ParamError("vec2wav: unit id out of range");
  }
  nn::NodeP x = unit_emb_.forward(g, units);
  x = g.concat_cols(g.concat_cols(x, g.input(nn::mat_col(log_pitch(pitch_hz)))),
                    g.input(nn::mat_col(log_energy(energy))));
  nn::NodeP h = g.relu(dec_in_.forward(g, x));
  for (size_t i = 0; i < dec_convs_.size(); ++i) {
    nn::NodeP c = g.relu(dec_convs_[i].forward(g, h));
    h = dec_sealn_[i].forward(g, g.add(h, c), spk, emo);
  }
  return h;
}

nn::NodeP Vec2WavModel::generate_waveform(nn::Graph& g, nn::NodeP frame_feat,
                                          const std::vector<double>& pitch_hz) const {
  if (static_cast<int>(pitch_hz.size()) != frame_feat->val.rows) {
    throw ParamError("vec2wav: pitch track must have one value per frame");
  }
  nn::NodeP h = frame_feat;
  for (const nn::TConv1d& up : ups_) {
    h = g.leaky_relu(up.forward(g, h), 0.1);
  }
  const int n = h->val.rows;
  if (n != frame_feat->val.rows * cfg_.hop) {
    throw ParamError("vec2wav: upsampling did not reach hop rate");
  }

  // Deterministic sine excitation at the target pitch; gives the output
  // convs an oscillator to shape instead of having to invent periodicity.
  std::vector<double> exc(static_cast<size_t>(n));
  double phase = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f0 = std::max(pitch_hz[static_cast<size_t>(i / cfg_.hop)], 1.0);
    phase += 2.0 * std::numbers::pi * f0 / cfg_.sample_rate;
    exc[static_cast<size_t>(i)] = 0.1 * std::sin(phase);
  }
  h = g.concat_cols(h, g.input(nn::mat_col(exc)));
  h = g.leaky_relu(post1_.forward(g, h), 0.1);
  return g.tanh_op(post2_.forward(g, h));
}

Waveform Vec2WavModel::infer(const Vec2WavItem& item) const {
  nn::Graph g;
  nn::NodeP spk = speaker_condition(g, item);
  nn::NodeP emo = emotion_condition(g, item);
  nn::NodeP feat = frame_decode(g, item.units, item.pitch_hz, item.energy, spk, emo);
  nn::NodeP wav = generate_waveform(g, feat, item.pitch_hz);
  Waveform out;
  out.sample_rate = cfg_.sample_rate;
  out.samples = wav->val.v;
  return out;
}

double scl_value(const std::vector<std::vector<double>>& gen_emb,
                 const std::vector<std::vector<double>>& gt_emb, double alpha) {
  if (gen_emb.empty() || gen_emb.size() != gt_emb.size()) {
    throw ParamError("scl: need matching non-empty embedding batches");
  }
  double mean_cos = 0.0;
  for (size_t i = 0; i < gen_emb.size(); ++i) {
    mean_cos += encoders::cosine(gen_emb[i], gt_emb[i]);
  }
  mean_cos /= static_cast<double>(gen_emb.size());
  return -alpha * mean_cos;
}

nn::NodeP scl_loss_graph(nn::Graph& g, const std::vector<nn::NodeP>& gen_wavs,
                         const std::vector<const Waveform*>& gt_wavs,
                         const encoders::ClassifierEncoder& phi, double alpha,
                         int sample_rate) {
  if (gen_wavs.empty() || gen_wavs.size() != gt_wavs.size()) {
    throw ParamError("scl: need matching generated and ground-truth batches");
  }
  dsp::MelConfig mcfg;
  mcfg.n_mels = phi.config().n_mels;
  const nn::Mat fbank = nn::mat_from(
      dsp::mel_filterbank(mcfg.n_fft, mcfg.n_mels, sample_rate),
      mcfg.n_fft / 2 + 1, mcfg.n_mels);
  nn::NodeP sum = nullptr;
  for (size_t i = 0; i < gen_wavs.size(); ++i) {
    nn::NodeP mag = g.stft_mag(gen_wavs[i], mcfg.n_fft, mcfg.hop, mcfg.win,
                               mcfg.center);
    nn::NodeP mel = g.log_clamp(g.matmul(mag, g.input(fbank)), mcfg.log_floor);
    nn::NodeP gen_emb = phi.embed_graph(g, mel);
    Waveform gt;
    gt.sample_rate = sample_rate;
    gt.samples = gt_wavs[i]->samples;
    const std::vector<double> gt_emb = phi.embed(gt);
    nn::NodeP cos = g.clamp1(g.cosine_sim(
        gen_emb, g.input(nn::mat_from(gt_emb, 1, static_cast<int>(gt_emb.size())))));
    sum = sum == nullptr ? cos : g.add(sum, cos);
  }
  nn::NodeP mean = g.scale(sum, 1.0 / static_cast<double>(gen_wavs.size()));
  return g.scale(mean, -alpha);
}

nn::NodeP vec2wav_loss(const Vec2WavModel& model, nn::Graph& g,
                       const Vec2WavItem& item,
                       const encoders::ClassifierEncoder* phi,
                       Vec2WavLossParts* parts) {
  const Vec2WavConfig& cfg = model.config();
  const size_t n = item.units.size() * static_cast<size_t>(cfg.hop);
  if (item.target.size() != n) {
    throw ParamError("vec2wav_loss: target length must be frames * hop");
  }

  nn::NodeP spk = model.speaker_condition(g, item);
  nn::NodeP emo = model.emotion_condition(g, item);
  nn::NodeP feat =
      model.frame_decode(g, item.units, item.pitch_hz, item.energy, spk, emo);
  nn::NodeP wav = model.generate_waveform(g, feat, item.pitch_hz);

  // Mel reconstruction in log space, identical pipeline on both sides.
  const nn::Mat fbank = nn::mat_from(
      dsp::mel_filterbank(cfg.n_fft, cfg.n_mels, cfg.sample_rate),
      cfg.n_fft / 2 + 1, cfg.n_mels);
  nn::NodeP fbank_in = g.input(fbank);
  nn::NodeP gen_mel = g.log_clamp(
      g.matmul(g.stft_mag(wav, cfg.n_fft, cfg.hop, cfg.win, true), fbank_in),
      1e-5);
  Waveform target_wav;
  target_wav.sample_rate = cfg.sample_rate;
  target_wav.samples = item.target;
  dsp::MelConfig mcfg;
  mcfg.n_fft = cfg.n_fft;
  mcfg.hop = cfg.hop;
  mcfg.win = cfg.win;
  mcfg.n_mels = cfg.n_mels;
  const dsp::MelSpectrogram tgt_mel = dsp::mel_spectrogram(target_wav, mcfg);
  nn::NodeP mel_l1 = g.l1_loss(
      gen_mel, g.input(nn::mat_from(tgt_mel.frames, tgt_mel.n_frames, tgt_mel.n_mels)));

  // Multi-resolution STFT: log-magnitude L1 plus spectral convergence.
  nn::NodeP stft_total = nullptr;
  for (const StftRes& res : kStftResolutions) {
    if (item.target.size() < static_cast<size_t>(res.win)) continue;
    int frames = 0;
    std::vector<double> tmag = dsp::stft_magnitude(item.target, res.n_fft,
                                                   res.hop, res.win, false, &frames);
    nn::NodeP tgt = g.input(nn::mat_from(tmag, frames, res.n_fft / 2 + 1));
    nn::NodeP gen = g.stft_mag(wav, res.n_fft, res.hop, res.win, false);
    nn::NodeP log_l1 = g.l1_loss(g.log_clamp(gen, 1e-5), g.log_clamp(tgt, 1e-5));
    double tnorm = 1e-12;
    for (double v : tmag) tnorm += v * v;
    nn::NodeP sc = g.scale(g.frob_dist(gen, tgt), 1.0 / std::sqrt(tnorm));
    nn::NodeP term = g.add(log_l1, sc);
    stft_total = stft_total == nullptr ? term : g.add(stft_total, term);
  }
  if (stft_total == nullptr) {
    throw ParamError("vec2wav_loss: segment shorter than every STFT window");
  }
  stft_total = g.scale(stft_total, 1.0 / 3.0);

  nn::NodeP total = g.add(g.scale(mel_l1, cfg.mel_weight),
                          g.scale(stft_total, cfg.stft_weight));
  double scl_part = 0.0;
  if (phi != nullptr && cfg.scl_alpha != 0.0) {
    nn::NodeP scl = scl_loss_graph(g, {wav}, {&target_wav}, *phi,
                                   cfg.scl_alpha, cfg.sample_rate);
    scl_part = scl->val.at(0, 0);
    total = g.add(total, scl);
  }

  if (parts != nullptr) {
    parts->total = total->val.at(0, 0);
    parts->mel_l1 = mel_l1->val.at(0, 0);
    parts->mr_stft = stft_total->val.at(0, 0);
    parts->scl = scl_part;
  }
  return total;
}

}  // namespace crossvox::vec2wav
