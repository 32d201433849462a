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

#include "crossvox/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "crossvox/common.h"
#include "crossvox/corpus.h"
#include "crossvox/kernels.h"
#include "crossvox/nn/optim.h"
#include "crossvox/perturb.h"

namespace crossvox::training {

using nlohmann::json;

std::string train_config_json(const TrainConfig& cfg) {
  json j;
  j["steps"] = cfg.steps;
  j["batch"] = cfg.batch;
  j["lr"] = cfg.lr;
  j["crop_frames"] = cfg.crop_frames;
  j["seg_frames"] = cfg.seg_frames;
  j["log_every"] = cfg.log_every;
  j["seed"] = cfg.seed;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("train config: bad JSON: ") + e.what());
  }
  TrainConfig cfg;
  cfg.steps = j.value("steps", cfg.steps);
  cfg.batch = j.value("batch", cfg.batch);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.crop_frames = j.value("crop_frames", cfg.crop_frames);
  cfg.seg_frames = j.value("seg_frames", cfg.seg_frames);
  cfg.log_every = j.value("log_every", cfg.log_every);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

namespace {

struct JoinedRecord {
  corpus::ManifestRecord rec;
  perturb::PairRecord pair;
};

std::vector<JoinedRecord> join_manifests(const std::string& manifest_path,
                                         const std::string& pairs_path) {
  const std::vector<corpus::ManifestRecord> records =
      corpus::read_manifest(manifest_path);
  const std::vector<perturb::PairRecord> pairs = perturb::read_pairs(pairs_path);
  std::map<std::string, const perturb::PairRecord*> by_id;
  for (const auto& p : pairs) by_id[p.utterance_id] = &p;
  std::vector<JoinedRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    auto it = by_id.find(rec.utterance_id);
    if (it == by_id.end()) {
      throw MissingArtifactError("no perturbation pair for utterance " +
                                 rec.utterance_id);
    }
    out.push_back({rec, *it->second});
  }
  return out;
}

void check_alignment(const UtteranceFeatures& f, int hop) {
  const size_t frames = std::accumulate(f.durations.begin(), f.durations.end(),
                                        size_t{0});
  if (static_cast<size_t>(f.clean_mel.n_frames) != frames ||
      f.units.size() != frames || f.pitch_fr.size() != frames ||
      f.energy_fr.size() != frames ||
      f.clean.samples.size() != frames * static_cast<size_t>(hop)) {
    throw FormatError("feature alignment broken for utterance " +
                      f.utterance_id);
  }
}

void restore_params(nn::ParamRegistry& reg, const Checkpoint& ckpt) {
  for (const auto& p : reg.params()) {
    const nn::Mat& stored = ckpt.require(p->name());
    if (!stored.same_shape(p->value())) {
      throw FormatError("resume: tensor shape mismatch for " + p->name());
    }
    p->value() = stored;
  }
}

void save_train_checkpoint(const std::string& path, Checkpoint ckpt,
                           const nn::Adam& adam, int64_t step) {
  ckpt.step = step;
  for (auto& kv : adam.export_state()) ckpt.tensors.push_back(std::move(kv));
  save_checkpoint(path, ckpt);
}

void write_log_line(std::ofstream& out, const StepRecord& rec, double ms) {
  if (!out.is_open()) return;
  json j;
  j["step"] = rec.step;
  j["total"] = rec.total;
  for (const auto& [k, v] : rec.parts) j[k] = v;
  j["ms"] = ms;
  out << j.dump() << "\n";
  out.flush();
}

void require_frozen(const encoders::ClassifierEncoder& phi) {
  for (const auto& p : phi.registry().params()) {
    if (p->node()->requires_grad) {
      throw ParamError("vec2wav training: loss network must be frozen");
    }
  }
}

}  // namespace

std::vector<double> fill_unvoiced(const std::vector<double>& f0,
                                  double fallback) {
  std::vector<double> out(f0.size());
  for (size_t i = 0; i < f0.size(); ++i) {
    out[i] = f0[i] > 0.0 ? f0[i] : fallback;
  }
  return out;
}

std::vector<double> phoneme_pitch_targets(const std::vector<double>& pitch_fr,
                                          const std::vector<int>& durations) {
  std::vector<double> voiced;
  for (double v : pitch_fr) {
    if (v > 0.0) voiced.push_back(v);
  }
  double fallback = txt2vec::kPitchRef;
  if (!voiced.empty()) {
    std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2,
                     voiced.end());
    fallback = voiced[voiced.size() / 2];
  }
  std::vector<double> out;
  out.reserve(durations.size());
  size_t t = 0;
  for (int d : durations) {
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < d && t + k < pitch_fr.size(); ++k) {
      if (pitch_fr[t + k] > 0.0) {
        sum += pitch_fr[t + k];
        ++n;
      }
    }
    const double hz = n > 0 ? sum / n : fallback;
    out.push_back(std::log(hz / txt2vec::kPitchRef));
    t += static_cast<size_t>(d);
  }
  return out;
}

std::vector<double> phoneme_energy_targets(const std::vector<double>& energy_fr,
                                           const std::vector<int>& durations) {
  std::vector<double> out;
  out.reserve(durations.size());
  size_t t = 0;
  for (int d : durations) {
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < d && t + k < energy_fr.size(); ++k) {
      sum += energy_fr[t + k];
      ++n;
    }
    const double rms = std::max(n > 0 ? sum / n : 0.0, 1e-4);
    out.push_back(std::log(rms / txt2vec::kEnergyRef));
    t += static_cast<size_t>(d);
  }
  return out;
}

std::vector<UtteranceFeatures> prepare_features(
    const std::string& manifest_path, const std::string& pairs_path,
    const codebook::Codebook& cb,
    const encoders::ClassifierEncoder* emotion_encoder) {
  const std::vector<JoinedRecord> joined =
      join_manifests(manifest_path, pairs_path);
  dsp::MelConfig mcfg;
  mcfg.n_mels = cb.dim();  // the codebook dimension fixes the mel resolution
  const dsp::PitchConfig pcfg;

  std::vector<UtteranceFeatures> out(joined.size());
  kernels::parallel_for(
      static_cast<int>(joined.size()), kernels::threads(), [&](int i) {
        const JoinedRecord& jr = joined[static_cast<size_t>(i)];
        UtteranceFeatures f;
        f.utterance_id = jr.rec.utterance_id;
        f.speaker_id = jr.rec.speaker_id;
        f.emotion_id = jr.rec.emotion_id;
        f.language_id = jr.rec.language_id;
        f.phonemes = jr.rec.phonemes;
        f.durations = jr.rec.durations;
        f.clean = load_wav(
            corpus::manifest_join(manifest_path, jr.rec.wav_path));
        f.clean_mel = dsp::mel_spectrogram(f.clean, mcfg);

        const Waveform r_wav =
            load_wav(corpus::manifest_join(pairs_path, jr.pair.r_path));
        const dsp::MelSpectrogram r_mel = dsp::mel_spectrogram(r_wav, mcfg);
        f.units = codebook::encode_units(r_mel, cb);
        const dsp::PitchTrack track = dsp::extract_pitch(r_wav, pcfg);
        const double med = dsp::median_pitch(track);
        f.pitch_fr = fill_unvoiced(track.f0, med > 0.0 ? med : txt2vec::kPitchRef);
        f.energy_fr = dsp::frame_energy(r_wav, mcfg.hop, mcfg.win, true);

        if (emotion_encoder != nullptr) {
          const Waveform e_wav =
              load_wav(corpus::manifest_join(pairs_path, jr.pair.e_path));
          f.emo_emb = emotion_encoder->embed(e_wav);
        }
        check_alignment(f, mcfg.hop);
        out[static_cast<size_t>(i)] = std::move(f);
      });
  return out;
}

nn::Mat collect_unit_features(const std::string& manifest_path,
                              const std::string& pairs_path,
                              int max_frames_per_utt, int n_mels) {
  if (max_frames_per_utt < 1) {
    throw ParamError("collect_unit_features: max_frames_per_utt must be >= 1");
  }
  const std::vector<JoinedRecord> joined =
      join_manifests(manifest_path, pairs_path);
  dsp::MelConfig mcfg;
  mcfg.n_mels = n_mels;
  std::vector<dsp::MelSpectrogram> mels(joined.size());
  kernels::parallel_for(
      static_cast<int>(joined.size()), kernels::threads(), [&](int i) {
        const Waveform wav = load_wav(corpus::manifest_join(
            pairs_path, joined[static_cast<size_t>(i)].pair.r_path));
        mels[static_cast<size_t>(i)] = dsp::mel_spectrogram(wav, mcfg);
      });

  size_t total = 0;
  for (const auto& m : mels) {
    total += std::min(m.n_frames, max_frames_per_utt);
  }
  nn::Mat feats(static_cast<int>(total), mcfg.n_mels);
  int row = 0;
  for (const auto& m : mels) {
    const int keep = std::min(m.n_frames, max_frames_per_utt);
    for (int k = 0; k < keep; ++k) {
      // Evenly spaced frame picks keep the pool deterministic.
      const int t = static_cast<int>(
          (static_cast<long long>(k) * m.n_frames) / keep);
      for (int c = 0; c < m.n_mels; ++c) feats.at(row, c) = m.at(t, c);
      ++row;
    }
  }
  return feats;
}

std::vector<encoders::LabeledMel> labeled_mels(const std::string& manifest_path,
                                               const std::string& pairs_path,
                                               LabelKind label,
                                               AudioStream stream, int n_mels) {
  const std::vector<corpus::ManifestRecord> records =
      corpus::read_manifest(manifest_path);
  std::map<std::string, perturb::PairRecord> by_id;
  if (stream != AudioStream::kClean) {
    if (pairs_path.empty()) {
      throw ParamError("labeled_mels: perturbed streams need a pairs manifest");
    }
    for (auto& p : perturb::read_pairs(pairs_path)) by_id[p.utterance_id] = p;
  }

  dsp::MelConfig mcfg;
  mcfg.n_mels = n_mels;
  std::vector<encoders::LabeledMel> out(records.size());
  kernels::parallel_for(
      static_cast<int>(records.size()), kernels::threads(), [&](int i) {
        const corpus::ManifestRecord& rec = records[static_cast<size_t>(i)];
        std::string path;
        if (stream == AudioStream::kClean) {
          path = corpus::manifest_join(manifest_path, rec.wav_path);
        } else {
          auto it = by_id.find(rec.utterance_id);
          if (it == by_id.end()) {
            throw MissingArtifactError("no perturbation pair for utterance " +
                                       rec.utterance_id);
          }
          const std::string& rel = stream == AudioStream::kUnitStream
                                       ? it->second.r_path
                                       : it->second.e_path;
          path = corpus::manifest_join(pairs_path, rel);
        }
        encoders::LabeledMel lm;
        lm.mel = dsp::mel_spectrogram(load_wav(path), mcfg);
        lm.label = label == LabelKind::kSpeaker ? rec.speaker_id : rec.emotion_id;
        out[static_cast<size_t>(i)] = std::move(lm);
      });
  return out;
}

txt2vec::Txt2VecItem to_txt2vec_item(const UtteranceFeatures& f) {
  txt2vec::Txt2VecItem item;
  item.phonemes = f.phonemes;
  item.language = f.language_id;
  item.durations = f.durations;
  item.units = f.units;
  item.pitch_tgt = phoneme_pitch_targets(f.pitch_fr, f.durations);
  item.energy_tgt = phoneme_energy_targets(f.energy_fr, f.durations);
  item.ref_mel = f.clean_mel;
  return item;
}

vec2wav::Vec2WavItem to_vec2wav_item(const UtteranceFeatures& f) {
  vec2wav::Vec2WavItem item;
  item.units = f.units;
  item.pitch_hz = f.pitch_fr;
  item.energy = f.energy_fr;
  item.speaker_id = f.speaker_id;
  item.emo_emb = f.emo_emb;
  item.target = f.clean.samples;
  return item;
}

vec2wav::Vec2WavItem crop_vec2wav_item(const vec2wav::Vec2WavItem& full, int t0,
                                       int frames) {
  const int total = static_cast<int>(full.units.size());
  if (frames < 1 || t0 < 0 || t0 + frames > total) {
    throw ParamError("crop_vec2wav_item: window out of range");
  }
  const size_t hop = full.target.size() / full.units.size();
  vec2wav::Vec2WavItem out;
  out.units.assign(full.units.begin() + t0, full.units.begin() + t0 + frames);
  out.pitch_hz.assign(full.pitch_hz.begin() + t0,
                      full.pitch_hz.begin() + t0 + frames);
  out.energy.assign(full.energy.begin() + t0, full.energy.begin() + t0 + frames);
  out.speaker_id = full.speaker_id;
  out.spk_emb = full.spk_emb;
  out.emo_emb = full.emo_emb;
  out.target.assign(full.target.begin() + static_cast<size_t>(t0) * hop,
                    full.target.begin() + (static_cast<size_t>(t0) + frames) * hop);
  return out;
}

double mean_total_head(const TrainResult& r, size_t n) {
  if (r.log.empty()) throw ParamError("mean_total_head: empty run");
  n = std::min(n, r.log.size());
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += r.log[i].total;
  return sum / static_cast<double>(n);
}

double mean_total_tail(const TrainResult& r, size_t n) {
  if (r.log.empty()) throw ParamError("mean_total_tail: empty run");
  n = std::min(n, r.log.size());
  double sum = 0.0;
  for (size_t i = r.log.size() - n; i < r.log.size(); ++i) sum += r.log[i].total;
  return sum / static_cast<double>(n);
}

TrainResult train_txt2vec(txt2vec::Txt2VecModel& model,
                          const std::vector<txt2vec::Txt2VecItem>& items,
                          const TrainConfig& cfg, const std::string& log_path,
                          const std::string& ckpt_path,
                          const std::string& resume_from) {
  if (items.empty()) throw ParamError("train_txt2vec: no items");
  if (cfg.batch < 1 || cfg.steps < 0) {
    throw ConfigError("train_txt2vec: batch must be >= 1 and steps >= 0");
  }
  nn::Adam adam(model.registry(), cfg.lr);
  int64_t start_step = 0;
  if (!resume_from.empty()) {
    const Checkpoint ckpt = load_checkpoint(resume_from);
    if (ckpt.kind != "txt2vec") {
      throw FormatError("resume: checkpoint kind is '" + ckpt.kind + "'");
    }
    restore_params(model.registry(), ckpt);
    adam.import_state(ckpt.tensors, ckpt.step);
    start_step = ckpt.step;
  }

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, start_step > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot open run log " + log_path);
  }

  TrainResult result;
  const int n = static_cast<int>(items.size());
  for (int64_t step = start_step; step < cfg.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng batch_rng(derive_seed(cfg.seed, "t2v-batch#" + std::to_string(step)));
    model.registry().zero_grad();
    txt2vec::Txt2VecLossParts sum{};
    for (int b = 0; b < cfg.batch; ++b) {
      const txt2vec::Txt2VecItem& item =
          items[static_cast<size_t>(batch_rng.randint(0, n - 1))];
      const uint64_t item_seed = derive_seed(
          cfg.seed, "t2v-item#" + std::to_string(step) + "." + std::to_string(b));
      nn::Graph g;
      txt2vec::Txt2VecLossParts parts;
      nn::NodeP loss = txt2vec::txt2vec_loss(model, g, item, true, item_seed,
                                             cfg.crop_frames, &parts);
      g.backward(g.scale(loss, 1.0 / cfg.batch));
      sum.total += parts.total;
      sum.unit_ce += parts.unit_ce;
      sum.pitch += parts.pitch;
      sum.energy += parts.energy;
      sum.duration += parts.duration;
    }
    adam.step();

    const double inv = 1.0 / cfg.batch;
    StepRecord rec;
    rec.step = step + 1;
    rec.total = sum.total * inv;
    rec.parts = {{"unit_ce", sum.unit_ce * inv},
                 {"pitch", sum.pitch * inv},
                 {"energy", sum.energy * inv},
                 {"duration", sum.duration * inv}};
    result.log.push_back(rec);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    if (rec.step % cfg.log_every == 0 || rec.step == cfg.steps) {
      write_log_line(log, rec, ms);
    }
  }

  if (!ckpt_path.empty()) {
    save_train_checkpoint(ckpt_path, model.to_checkpoint(), adam, cfg.steps);
  }
  return result;
}

TrainResult train_vec2wav(vec2wav::Vec2WavModel& model,
                          const std::vector<vec2wav::Vec2WavItem>& items,
                          const encoders::ClassifierEncoder* phi,
                          const TrainConfig& cfg, const std::string& log_path,
                          const std::string& ckpt_path,
                          const std::string& resume_from) {
  if (items.empty()) throw ParamError("train_vec2wav: no items");
  if (cfg.batch < 1 || cfg.steps < 0) {
    throw ConfigError("train_vec2wav: batch must be >= 1 and steps >= 0");
  }
  uint64_t phi_hash = 0;
  if (phi != nullptr) {
    require_frozen(*phi);
    phi_hash = checkpoint_hash(phi->to_checkpoint("speaker_encoder"));
  }

  nn::Adam adam(model.registry(), cfg.lr);
  int64_t start_step = 0;
  if (!resume_from.empty()) {
    const Checkpoint ckpt = load_checkpoint(resume_from);
    if (ckpt.kind != "vec2wav") {
      throw FormatError("resume: checkpoint kind is '" + ckpt.kind + "'");
    }
    restore_params(model.registry(), ckpt);
    adam.import_state(ckpt.tensors, ckpt.step);
    start_step = ckpt.step;
  }

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, start_step > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot open run log " + log_path);
  }

  TrainResult result;
  const int n = static_cast<int>(items.size());
  for (int64_t step = start_step; step < cfg.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng batch_rng(derive_seed(cfg.seed, "v2w-batch#" + std::to_string(step)));
    model.registry().zero_grad();
    vec2wav::Vec2WavLossParts sum{};
    for (int b = 0; b < cfg.batch; ++b) {
      const vec2wav::Vec2WavItem& full =
          items[static_cast<size_t>(batch_rng.randint(0, n - 1))];
      const int total = static_cast<int>(full.units.size());
      const int seg = cfg.seg_frames > 0 ? std::min(cfg.seg_frames, total) : total;
      const int at =
          total > seg ? static_cast<int>(batch_rng.randint(0, total - seg)) : 0;
      const vec2wav::Vec2WavItem item = crop_vec2wav_item(full, at, seg);
      nn::Graph g;
      vec2wav::Vec2WavLossParts parts;
      nn::NodeP loss = vec2wav::vec2wav_loss(model, g, item, phi, &parts);
      g.backward(g.scale(loss, 1.0 / cfg.batch));
      sum.total += parts.total;
      sum.mel_l1 += parts.mel_l1;
      sum.mr_stft += parts.mr_stft;
      sum.scl += parts.scl;
    }
    adam.step();

    const double inv = 1.0 / cfg.batch;
    StepRecord rec;
    rec.step = step + 1;
    rec.total = sum.total * inv;
    rec.parts = {{"mel_l1", sum.mel_l1 * inv},
                 {"mr_stft", sum.mr_stft * inv},
                 {"scl", sum.scl * inv}};
    result.log.push_back(rec);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    if (rec.step % cfg.log_every == 0 || rec.step == cfg.steps) {
      write_log_line(log, rec, ms);
    }
  }

  if (phi != nullptr &&
      checkpoint_hash(phi->to_checkpoint("speaker_encoder")) != phi_hash) {
    throw Error("vec2wav training modified the frozen loss network");
  }
  if (!ckpt_path.empty()) {
    save_train_checkpoint(ckpt_path, model.to_checkpoint(), adam, cfg.steps);
  }
  return result;
}

}  // namespace crossvox::training
