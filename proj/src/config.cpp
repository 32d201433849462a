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

#include "crossvox/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crossvox/common.h"

namespace crossvox::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& scope) {
  if (!j.is_object()) {
    throw ConfigError("config: '" + scope + "' must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "' in " + scope);
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback,
         const std::string& scope) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + key + "' in " + scope);
  }
}

void parse_paths(const json& j, GlobalConfig::Paths& p) {
  check_keys(j,
             {"work_dir", "corpus_dir", "perturb_dir", "codebook",
              "speaker_encoder", "emotion_encoder", "txt2vec", "vec2wav",
              "report_dir"},
             "paths");
  p.work_dir = get_or<std::string>(j, "work_dir", p.work_dir, "paths");
  p.corpus_dir = get_or<std::string>(j, "corpus_dir", p.corpus_dir, "paths");
  p.perturb_dir = get_or<std::string>(j, "perturb_dir", p.perturb_dir, "paths");
  p.codebook = get_or<std::string>(j, "codebook", p.codebook, "paths");
  p.speaker_encoder =
      get_or<std::string>(j, "speaker_encoder", p.speaker_encoder, "paths");
  p.emotion_encoder =
      get_or<std::string>(j, "emotion_encoder", p.emotion_encoder, "paths");
  p.txt2vec = get_or<std::string>(j, "txt2vec", p.txt2vec, "paths");
  p.vec2wav = get_or<std::string>(j, "vec2wav", p.vec2wav, "paths");
  p.report_dir = get_or<std::string>(j, "report_dir", p.report_dir, "paths");
}

void parse_corpus(const json& j, corpus::CorpusConfig& c) {
  check_keys(j,
             {"num_speakers", "num_emotions", "utts_per_pair", "phoneme_vocab",
              "min_phonemes", "max_phonemes", "min_duration", "max_duration"},
             "corpus");
  c.num_speakers = get_or(j, "num_speakers", c.num_speakers, "corpus");
  c.num_emotions = get_or(j, "num_emotions", c.num_emotions, "corpus");
  c.utts_per_pair = get_or(j, "utts_per_pair", c.utts_per_pair, "corpus");
  c.phoneme_vocab = get_or(j, "phoneme_vocab", c.phoneme_vocab, "corpus");
  c.min_phonemes = get_or(j, "min_phonemes", c.min_phonemes, "corpus");
  c.max_phonemes = get_or(j, "max_phonemes", c.max_phonemes, "corpus");
  c.min_duration = get_or(j, "min_duration", c.min_duration, "corpus");
  c.max_duration = get_or(j, "max_duration", c.max_duration, "corpus");
}

void parse_perturbation(const json& j, perturb::PerturbationSpec& p) {
  check_keys(j, {"method", "shift_low", "shift_high", "paired_streams"},
             "perturbation");
  const std::string method = get_or<std::string>(
      j, "method", "formant_shift", "perturbation");
  if (method == "formant_shift") {
    p.method = perturb::PerturbMethod::kFormantShift;
  } else if (method == "external_anonymizer") {
    p.method = perturb::PerturbMethod::kExternalAnonymizer;
  } else {
    throw ConfigError("config: unknown perturbation method '" + method + "'");
  }
  p.shift_low = get_or(j, "shift_low", p.shift_low, "perturbation");
  p.shift_high = get_or(j, "shift_high", p.shift_high, "perturbation");
  p.paired_streams =
      get_or(j, "paired_streams", p.paired_streams, "perturbation");
}

void parse_codebook(const json& j, GlobalConfig::CodebookParams& c) {
  check_keys(j, {"k", "max_frames_per_utt", "restarts", "max_iters"},
             "codebook");
  c.k = get_or(j, "k", c.k, "codebook");
  c.max_frames_per_utt =
      get_or(j, "max_frames_per_utt", c.max_frames_per_utt, "codebook");
  c.restarts = get_or(j, "restarts", c.restarts, "codebook");
  c.max_iters = get_or(j, "max_iters", c.max_iters, "codebook");
}

void parse_encoder(const json& j, encoders::EncoderConfig& e) {
  check_keys(j, {"channels", "kernel", "emb_dim", "lr", "steps", "batch"},
             "encoder");
  e.channels = get_or(j, "channels", e.channels, "encoder");
  e.kernel = get_or(j, "kernel", e.kernel, "encoder");
  e.emb_dim = get_or(j, "emb_dim", e.emb_dim, "encoder");
  e.lr = get_or(j, "lr", e.lr, "encoder");
  e.steps = get_or(j, "steps", e.steps, "encoder");
  e.batch = get_or(j, "batch", e.batch, "encoder");
}

void parse_txt2vec_model(const json& j, txt2vec::Txt2VecConfig& m) {
  check_keys(j,
             {"d_model", "heads", "enc_blocks", "ffn_dim", "style_dim",
              "style_heads", "dec_blocks", "dec_kernel", "dropout"},
             "txt2vec_model");
  m.d_model = get_or(j, "d_model", m.d_model, "txt2vec_model");
  m.heads = get_or(j, "heads", m.heads, "txt2vec_model");
  m.enc_blocks = get_or(j, "enc_blocks", m.enc_blocks, "txt2vec_model");
  m.ffn_dim = get_or(j, "ffn_dim", m.ffn_dim, "txt2vec_model");
  m.style_dim = get_or(j, "style_dim", m.style_dim, "txt2vec_model");
  m.style_heads = get_or(j, "style_heads", m.style_heads, "txt2vec_model");
  m.dec_blocks = get_or(j, "dec_blocks", m.dec_blocks, "txt2vec_model");
  m.dec_kernel = get_or(j, "dec_kernel", m.dec_kernel, "txt2vec_model");
  m.dropout = get_or(j, "dropout", m.dropout, "txt2vec_model");
}

void parse_vec2wav_model(const json& j, vec2wav::Vec2WavConfig& m) {
  check_keys(j,
             {"d_model", "spk_dim", "emo_dim", "dec_blocks", "dec_kernel",
              "up_factors", "up_channels", "final_kernel", "mel_weight",
              "stft_weight", "scl_alpha", "external_speaker"},
             "vec2wav_model");
  m.d_model = get_or(j, "d_model", m.d_model, "vec2wav_model");
  m.spk_dim = get_or(j, "spk_dim", m.spk_dim, "vec2wav_model");
  m.emo_dim = get_or(j, "emo_dim", m.emo_dim, "vec2wav_model");
  m.dec_blocks = get_or(j, "dec_blocks", m.dec_blocks, "vec2wav_model");
  m.dec_kernel = get_or(j, "dec_kernel", m.dec_kernel, "vec2wav_model");
  m.up_factors = get_or(j, "up_factors", m.up_factors, "vec2wav_model");
  m.up_channels = get_or(j, "up_channels", m.up_channels, "vec2wav_model");
  m.final_kernel = get_or(j, "final_kernel", m.final_kernel, "vec2wav_model");
  m.mel_weight = get_or(j, "mel_weight", m.mel_weight, "vec2wav_model");
  m.stft_weight = get_or(j, "stft_weight", m.stft_weight, "vec2wav_model");
  m.scl_alpha = get_or(j, "scl_alpha", m.scl_alpha, "vec2wav_model");
  m.external_speaker =
      get_or(j, "external_speaker", m.external_speaker, "vec2wav_model");
}

void parse_train(const json& j, training::TrainConfig& t,
                 const std::string& scope) {
  check_keys(j, {"steps", "batch", "lr", "crop_frames", "seg_frames",
                 "log_every"},
             scope);
  t.steps = get_or(j, "steps", t.steps, scope);
  t.batch = get_or(j, "batch", t.batch, scope);
  t.lr = get_or(j, "lr", t.lr, scope);
  t.crop_frames = get_or(j, "crop_frames", t.crop_frames, scope);
  t.seg_frames = get_or(j, "seg_frames", t.seg_frames, scope);
  t.log_every = get_or(j, "log_every", t.log_every, scope);
}

std::string default_path(const std::string& value, const std::string& work_dir,
                         const std::string& leaf) {
  return value.empty() ? work_dir + "/" + leaf : value;
}

}  // namespace

// Copies the single-source-of-truth fields into the module configs and fills
// default paths and derived seeds.
void finalize_global_config(GlobalConfig& cfg) {
  GlobalConfig::Paths& p = cfg.paths;
  p.corpus_dir = default_path(p.corpus_dir, p.work_dir, "corpus");
  p.perturb_dir = default_path(p.perturb_dir, p.work_dir, "perturb");
  p.codebook = default_path(p.codebook, p.work_dir, "codebook.cvck");
  p.speaker_encoder =
      default_path(p.speaker_encoder, p.work_dir, "speaker_encoder.cvck");
  p.emotion_encoder =
      default_path(p.emotion_encoder, p.work_dir, "emotion_encoder.cvck");
  p.txt2vec = default_path(p.txt2vec, p.work_dir, "txt2vec.cvck");
  p.vec2wav = default_path(p.vec2wav, p.work_dir, "vec2wav.cvck");
  p.report_dir = default_path(p.report_dir, p.work_dir, "report");

  cfg.corpus.sample_rate = cfg.sample_rate;
  cfg.corpus.hop = cfg.hop;

  cfg.encoder.n_mels = cfg.n_mels;

  cfg.txt2vec_model.phoneme_vocab = cfg.corpus.phoneme_vocab;
  cfg.txt2vec_model.num_languages = 2;
  cfg.txt2vec_model.unit_vocab = cfg.codebook.k;
  cfg.txt2vec_model.n_mels = cfg.n_mels;
  cfg.txt2vec_model.seed = derive_seed(cfg.seed, "txt2vec");

  cfg.vec2wav_model.unit_vocab = cfg.codebook.k;
  cfg.vec2wav_model.num_speakers = cfg.corpus.num_speakers;
  cfg.vec2wav_model.sample_rate = cfg.sample_rate;
  cfg.vec2wav_model.hop = cfg.hop;
  cfg.vec2wav_model.n_mels = cfg.n_mels;
  cfg.vec2wav_model.n_fft = cfg.n_fft;
  cfg.vec2wav_model.win = cfg.win;
  cfg.vec2wav_model.seed = derive_seed(cfg.seed, "vec2wav");

  cfg.txt2vec_train.seed = derive_seed(cfg.seed, "txt2vec-train");
  cfg.vec2wav_train.seed = derive_seed(cfg.seed, "vec2wav-train");
  validate_global_config(cfg);
}

GlobalConfig global_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  check_keys(j,
             {"seed", "sample_rate", "n_fft", "hop", "win", "n_mels", "paths",
              "corpus", "perturbation", "codebook", "encoder", "txt2vec_model",
              "vec2wav_model", "txt2vec_train", "vec2wav_train"},
             "(top level)");
  GlobalConfig cfg;
  cfg.seed = get_or<uint64_t>(j, "seed", cfg.seed, "(top level)");
  cfg.sample_rate = get_or(j, "sample_rate", cfg.sample_rate, "(top level)");
  cfg.n_fft = get_or(j, "n_fft", cfg.n_fft, "(top level)");
  cfg.hop = get_or(j, "hop", cfg.hop, "(top level)");
  cfg.win = get_or(j, "win", cfg.win, "(top level)");
  cfg.n_mels = get_or(j, "n_mels", cfg.n_mels, "(top level)");
  if (j.contains("paths")) parse_paths(j.at("paths"), cfg.paths);
  if (j.contains("corpus")) parse_corpus(j.at("corpus"), cfg.corpus);
  if (j.contains("perturbation")) {
    parse_perturbation(j.at("perturbation"), cfg.perturbation);
  }
  if (j.contains("codebook")) parse_codebook(j.at("codebook"), cfg.codebook);
  if (j.contains("encoder")) parse_encoder(j.at("encoder"), cfg.encoder);
  if (j.contains("txt2vec_model")) {
    parse_txt2vec_model(j.at("txt2vec_model"), cfg.txt2vec_model);
  }
  if (j.contains("vec2wav_model")) {
    parse_vec2wav_model(j.at("vec2wav_model"), cfg.vec2wav_model);
  }
  if (j.contains("txt2vec_train")) {
    parse_train(j.at("txt2vec_train"), cfg.txt2vec_train, "txt2vec_train");
  }
  if (j.contains("vec2wav_train")) {
    parse_train(j.at("vec2wav_train"), cfg.vec2wav_train, "vec2wav_train");
  }
  finalize_global_config(cfg);
  return cfg;
}

GlobalConfig load_global_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return global_config_from_json(ss.str());
}

std::string global_config_json(const GlobalConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["sample_rate"] = cfg.sample_rate;
  j["n_fft"] = cfg.n_fft;
  j["hop"] = cfg.hop;
  j["win"] = cfg.win;
  j["n_mels"] = cfg.n_mels;
  j["paths"] = {{"work_dir", cfg.paths.work_dir},
                {"corpus_dir", cfg.paths.corpus_dir},
                {"perturb_dir", cfg.paths.perturb_dir},
                {"codebook", cfg.paths.codebook},
                {"speaker_encoder", cfg.paths.speaker_encoder},
                {"emotion_encoder", cfg.paths.emotion_encoder},
                {"txt2vec", cfg.paths.txt2vec},
                {"vec2wav", cfg.paths.vec2wav},
                {"report_dir", cfg.paths.report_dir}};
  j["corpus"] = {{"num_speakers", cfg.corpus.num_speakers},
                 {"num_emotions", cfg.corpus.num_emotions},
                 {"utts_per_pair", cfg.corpus.utts_per_pair},
                 {"phoneme_vocab", cfg.corpus.phoneme_vocab},
                 {"min_phonemes", cfg.corpus.min_phonemes},
                 {"max_phonemes", cfg.corpus.max_phonemes},
                 {"min_duration", cfg.corpus.min_duration},
                 {"max_duration", cfg.corpus.max_duration}};
  j["perturbation"] = {
      {"method", cfg.perturbation.method == perturb::PerturbMethod::kFormantShift
                     ? "formant_shift"
                     : "external_anonymizer"},
      {"shift_low", cfg.perturbation.shift_low},
      {"shift_high", cfg.perturbation.shift_high},
      {"paired_streams", cfg.perturbation.paired_streams}};
  j["codebook"] = {{"k", cfg.codebook.k},
                   {"max_frames_per_utt", cfg.codebook.max_frames_per_utt},
                   {"restarts", cfg.codebook.restarts},
                   {"max_iters", cfg.codebook.max_iters}};
  j["encoder"] = {{"channels", cfg.encoder.channels},
                  {"kernel", cfg.encoder.kernel},
                  {"emb_dim", cfg.encoder.emb_dim},
                  {"lr", cfg.encoder.lr},
                  {"steps", cfg.encoder.steps},
                  {"batch", cfg.encoder.batch}};
  j["txt2vec_model"] =
      json::parse(txt2vec::txt2vec_config_json(cfg.txt2vec_model));
  j["vec2wav_model"] =
      json::parse(vec2wav::vec2wav_config_json(cfg.vec2wav_model));
  j["txt2vec_train"] =
      json::parse(training::train_config_json(cfg.txt2vec_train));
  j["vec2wav_train"] =
      json::parse(training::train_config_json(cfg.vec2wav_train));
  return j.dump(2);
}

void validate_global_config(const GlobalConfig& cfg) {
  if (cfg.sample_rate < 8000) {
    throw ConfigError("config: sample_rate must be >= 8000");
  }
  if (cfg.hop < 1 || cfg.win < cfg.hop || cfg.n_fft < cfg.win) {
    throw ConfigError("config: need 1 <= hop <= win <= n_fft");
  }
  if (cfg.n_mels < 8) throw ConfigError("config: n_mels must be >= 8");
  if (cfg.corpus.num_speakers < 2 || cfg.corpus.num_emotions < 2) {
    throw ConfigError("config: corpus needs >= 2 speakers and >= 2 emotions");
  }
  if (cfg.corpus.utts_per_pair < 1 || cfg.corpus.phoneme_vocab < 2 ||
      cfg.corpus.min_phonemes < 1 ||
      cfg.corpus.max_phonemes < cfg.corpus.min_phonemes ||
      cfg.corpus.min_duration < 1 ||
      cfg.corpus.max_duration < cfg.corpus.min_duration) {
    throw ConfigError("config: corpus sizes out of range");
  }
  perturb::validate_spec(cfg.perturbation);
  if (cfg.codebook.k < 2 || cfg.codebook.max_frames_per_utt < 1 ||
      cfg.codebook.restarts < 1 || cfg.codebook.max_iters < 1) {
    throw ConfigError("config: codebook parameters out of range");
  }
  if (cfg.encoder.channels < 1 || cfg.encoder.kernel % 2 == 0 ||
      cfg.encoder.emb_dim < 1 || cfg.encoder.steps < 1 ||
      cfg.encoder.batch < 1) {
    throw ConfigError("config: encoder parameters out of range");
  }
  if (cfg.txt2vec_model.d_model % cfg.txt2vec_model.heads != 0) {
    throw ConfigError("config: txt2vec d_model must be divisible by heads");
  }
  if (cfg.txt2vec_model.d_model % cfg.txt2vec_model.style_heads != 0) {
    throw ConfigError(
        "config: txt2vec d_model must be divisible by style_heads");
  }
  if (cfg.txt2vec_model.dec_kernel % 2 == 0 ||
      cfg.vec2wav_model.dec_kernel % 2 == 0 ||
      cfg.vec2wav_model.final_kernel % 2 == 0) {
    throw ConfigError("config: convolution kernels must be odd");
  }
  if (cfg.vec2wav_model.up_factors.size() !=
          cfg.vec2wav_model.up_channels.size() ||
      cfg.vec2wav_model.up_factors.empty()) {
    throw ConfigError("config: up_factors and up_channels must align");
  }
  int prod = 1;
  for (int f : cfg.vec2wav_model.up_factors) {
    if (f < 1) throw ConfigError("config: up_factors must be positive");
    prod *= f;
  }
  if (prod != cfg.hop) {
    throw ConfigError(
        "config: product of vec2wav up_factors must equal the hop");
  }
  if (cfg.vec2wav_model.emo_dim != cfg.encoder.emb_dim) {
    throw ConfigError(
        "config: vec2wav emo_dim must equal the encoder embedding dim");
  }
  if (cfg.vec2wav_model.external_speaker &&
      cfg.vec2wav_model.spk_dim != cfg.encoder.emb_dim) {
    throw ConfigError(
        "config: external-speaker mode needs spk_dim == encoder emb_dim");
  }
  if (cfg.txt2vec_train.steps < 1 || cfg.txt2vec_train.batch < 1 ||
      cfg.vec2wav_train.steps < 1 || cfg.vec2wav_train.batch < 1 ||
      cfg.txt2vec_train.log_every < 1 || cfg.vec2wav_train.log_every < 1) {
    throw ConfigError("config: training budgets out of range");
  }
}

}  // namespace crossvox::config
