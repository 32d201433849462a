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
//
// Training loops: prosody target math, item plumbing, loss descent,
// seeded determinism, checkpoint resume, and feature preparation.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossvox/checkpoint.h"
#include "crossvox/corpus.h"
#include "crossvox/encoders.h"
#include "crossvox/perturb.h"
#include "crossvox/training.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"
#include "doctest.h"
#include "test_support.h"

using namespace crossvox;
using training::TrainConfig;
using training::TrainResult;
using testsupport::TempDir;

namespace {

txt2vec::Txt2VecConfig t2v_config() {
  txt2vec::Txt2VecConfig cfg;
  cfg.phoneme_vocab = 10;
  cfg.num_languages = 2;
  cfg.unit_vocab = 6;
  cfg.n_mels = 10;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.enc_blocks = 1;
  cfg.ffn_dim = 32;
  cfg.style_dim = 8;
  cfg.style_heads = 2;
  cfg.dec_blocks = 1;
  cfg.dec_kernel = 3;
  cfg.dropout = 0.1;
  cfg.seed = 3;
  return cfg;
}

txt2vec::Txt2VecItem t2v_item(const txt2vec::Txt2VecConfig& cfg, uint64_t seed) {
  txt2vec::Txt2VecItem item;
  Rng rng(seed);
  item.phonemes = {1, 4, 7, 2};
  item.language = 1;
  item.durations = {3, 2, 4, 2};
  const int total =
      std::accumulate(item.durations.begin(), item.durations.end(), 0);
  for (int t = 0; t < total; ++t) {
    item.units.push_back(static_cast<int>(rng.randint(0, cfg.unit_vocab - 1)));
  }
  for (size_t i = 0; i < item.phonemes.size(); ++i) {
    item.pitch_tgt.push_back(rng.uniform(-0.3, 0.3));
    item.energy_tgt.push_back(rng.uniform(-0.5, 0.5));
  }
  item.ref_mel.n_frames = 12;
  item.ref_mel.n_mels = cfg.n_mels;
  item.ref_mel.frames.resize(12 * static_cast<size_t>(cfg.n_mels));
  for (double& v : item.ref_mel.frames) v = rng.uniform(-4.0, 1.0);
  return item;
}

vec2wav::Vec2WavConfig v2w_config() {
  vec2wav::Vec2WavConfig cfg;
  cfg.unit_vocab = 6;
  cfg.num_speakers = 3;
  cfg.d_model = 12;
  cfg.spk_dim = 6;
  cfg.emo_dim = 6;
  cfg.dec_blocks = 1;
  cfg.dec_kernel = 3;
  cfg.up_factors = {2, 2};
  cfg.up_channels = {8, 6};
  cfg.final_kernel = 3;
  cfg.sample_rate = 16000;
  cfg.hop = 4;
  cfg.n_mels = 16;
  cfg.n_fft = 256;
  cfg.win = 256;
  cfg.scl_alpha = 0.5;
  cfg.seed = 4;
  return cfg;
}

// 128 frames -> 512 samples, long enough for the shortest STFT resolution.
vec2wav::Vec2WavItem v2w_item(const vec2wav::Vec2WavConfig& cfg, uint64_t seed) {
  vec2wav::Vec2WavItem item;
  Rng rng(seed);
  const int frames = 128;
  for (int t = 0; t < frames; ++t) {
    item.units.push_back(static_cast<int>(rng.randint(0, cfg.unit_vocab - 1)));
    item.pitch_hz.push_back(rng.uniform(100.0, 200.0));
    item.energy.push_back(rng.uniform(0.01, 0.1));
  }
  item.speaker_id = 1;
  for (int j = 0; j < cfg.emo_dim; ++j) {
    item.emo_emb.push_back(rng.uniform(-0.9, 0.9));
  }
  for (int i = 0; i < frames * cfg.hop; ++i) {
    item.target.push_back(
        0.4 * std::sin(2.0 * 3.14159265358979 * 220.0 * i / 16000.0));
  }
  return item;
}

std::vector<std::pair<std::string, std::vector<double>>> snapshot(
    const nn::ParamRegistry& reg) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (const auto& p : reg.params()) out.emplace_back(p->name(), p->value().v);
  return out;
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
  }
  return lines;
}

}  // namespace

TEST_CASE("fill_unvoiced replaces zero frames with the fallback") {
  const std::vector<double> f0 = {0.0, 120.0, 0.0, 130.0};
  const std::vector<double> filled = training::fill_unvoiced(f0, 100.0);
  CHECK(filled == std::vector<double>{100.0, 120.0, 100.0, 130.0});
  CHECK(training::fill_unvoiced({}, 50.0).empty());
}

TEST_CASE("phoneme pitch targets average voiced frames per span") {
  const double ref = txt2vec::kPitchRef;

  // Mixed spans: unvoiced frames are skipped inside each span.
  const std::vector<double> pitch = {150.0, 0.0, 170.0, 0.0, 0.0, 180.0};
  const std::vector<int> durs = {2, 3, 1};
  const auto tgt = training::phoneme_pitch_targets(pitch, durs);
  REQUIRE(tgt.size() == 3);
  CHECK(tgt[0] == doctest::Approx(std::log(150.0 / ref)).epsilon(1e-12));
  CHECK(tgt[1] == doctest::Approx(std::log(170.0 / ref)).epsilon(1e-12));
  CHECK(tgt[2] == doctest::Approx(std::log(180.0 / ref)).epsilon(1e-12));

  // A fully unvoiced span falls back to the track median over voiced frames.
  const std::vector<double> sparse = {0.0, 0.0, 160.0, 0.0, 0.0, 0.0};
  const auto tgt2 = training::phoneme_pitch_targets(sparse, {2, 1, 3});
  REQUIRE(tgt2.size() == 3);
  for (double v : tgt2) {
    CHECK(v == doctest::Approx(std::log(160.0 / ref)).epsilon(1e-12));
  }

  // No voiced frame anywhere: the reference pitch gives a zero log target.
  const auto tgt3 = training::phoneme_pitch_targets({0.0, 0.0, 0.0}, {3});
  REQUIRE(tgt3.size() == 1);
  CHECK(tgt3[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("phoneme energy targets clamp silent spans") {
  const double ref = txt2vec::kEnergyRef;
  const std::vector<double> energy = {0.05, 0.07, 0.0};
  const auto tgt = training::phoneme_energy_targets(energy, {2, 1});
  REQUIRE(tgt.size() == 2);
  CHECK(tgt[0] == doctest::Approx(std::log(0.06 / ref)).epsilon(1e-12));
  CHECK(tgt[1] == doctest::Approx(std::log(1e-4 / ref)).epsilon(1e-12));

  // Durations past the end of the track only average the frames that exist.
  const auto tail = training::phoneme_energy_targets({0.02, 0.04, 0.08}, {2, 4});
  REQUIRE(tail.size() == 2);
  CHECK(tail[1] == doctest::Approx(std::log(0.08 / ref)).epsilon(1e-12));
}

TEST_CASE("utterance features map onto stage items field by field") {
  training::UtteranceFeatures f;
  f.utterance_id = "u1";
  f.speaker_id = 2;
  f.emotion_id = 1;
  f.language_id = 1;
  f.phonemes = {1, 2};
  f.durations = {2, 3};
  f.units = {0, 1, 2, 1, 0};
  f.pitch_fr = {140.0, 150.0, 160.0, 170.0, 180.0};
  f.energy_fr = {0.05, 0.06, 0.07, 0.08, 0.09};
  f.emo_emb = {0.1, -0.2, 0.3};
  f.clean_mel.n_frames = 5;
  f.clean_mel.n_mels = 4;
  f.clean_mel.frames.assign(20, -1.5);
  f.clean.sample_rate = 16000;
  for (int i = 0; i < 20; ++i) f.clean.samples.push_back(0.01 * i);

  const txt2vec::Txt2VecItem t = training::to_txt2vec_item(f);
  CHECK(t.phonemes == f.phonemes);
  CHECK(t.language == 1);
  CHECK(t.durations == f.durations);
  CHECK(t.units == f.units);
  CHECK(t.pitch_tgt == training::phoneme_pitch_targets(f.pitch_fr, f.durations));
  CHECK(t.energy_tgt ==
        training::phoneme_energy_targets(f.energy_fr, f.durations));
  CHECK(t.ref_mel.n_frames == 5);
  CHECK(t.ref_mel.frames == f.clean_mel.frames);

  const vec2wav::Vec2WavItem v = training::to_vec2wav_item(f);
  CHECK(v.units == f.units);
  CHECK(v.pitch_hz == f.pitch_fr);
  CHECK(v.energy == f.energy_fr);
  CHECK(v.speaker_id == 2);
  CHECK(v.spk_emb.empty());
  CHECK(v.emo_emb == f.emo_emb);
  CHECK(v.target == f.clean.samples);
}

TEST_CASE("crop_vec2wav_item slices aligned windows") {
  vec2wav::Vec2WavItem full;
  for (int t = 0; t < 10; ++t) {
    full.units.push_back(t % 4);
    full.pitch_hz.push_back(100.0 + t);
    full.energy.push_back(0.01 * (t + 1));
  }
  full.speaker_id = 1;
  full.emo_emb = {0.5, -0.5};
  for (int i = 0; i < 40; ++i) full.target.push_back(static_cast<double>(i));

  const vec2wav::Vec2WavItem c = training::crop_vec2wav_item(full, 3, 4);
  CHECK(c.units == std::vector<int>{3, 0, 1, 2});
  CHECK(c.pitch_hz == std::vector<double>{103.0, 104.0, 105.0, 106.0});
  CHECK(c.energy.size() == 4);
  CHECK(c.speaker_id == 1);
  CHECK(c.emo_emb == full.emo_emb);
  REQUIRE(c.target.size() == 16);
  CHECK(c.target.front() == 12.0);
  CHECK(c.target.back() == 27.0);

  // The full window is an identity crop.
  const vec2wav::Vec2WavItem whole = training::crop_vec2wav_item(full, 0, 10);
  CHECK(whole.units == full.units);
  CHECK(whole.target == full.target);

  CHECK_THROWS_AS(training::crop_vec2wav_item(full, -1, 4), ParamError);
  CHECK_THROWS_AS(training::crop_vec2wav_item(full, 8, 3), ParamError);
  CHECK_THROWS_AS(training::crop_vec2wav_item(full, 0, 0), ParamError);
}

TEST_CASE("head and tail means summarize the step log") {
  TrainResult r;
  for (double total : {4.0, 2.0, 6.0}) {
    training::StepRecord rec;
    rec.step = static_cast<int64_t>(r.log.size()) + 1;
    rec.total = total;
    r.log.push_back(rec);
  }
  CHECK(training::mean_total_head(r, 2) == doctest::Approx(3.0));
  CHECK(training::mean_total_tail(r, 2) == doctest::Approx(4.0));
  // Window sizes clamp to the log length.
  CHECK(training::mean_total_head(r, 10) == doctest::Approx(4.0));
  CHECK(training::mean_total_tail(r, 10) == doctest::Approx(4.0));

  TrainResult empty;
  CHECK_THROWS_AS(training::mean_total_head(empty, 1), ParamError);
  CHECK_THROWS_AS(training::mean_total_tail(empty, 1), ParamError);
}

TEST_CASE("txt2vec training reduces the loss and logs every step") {
  const auto mcfg = t2v_config();
  txt2vec::Txt2VecModel model(mcfg);
  const std::vector<txt2vec::Txt2VecItem> items = {t2v_item(mcfg, 1),
                                                   t2v_item(mcfg, 2)};
  TrainConfig cfg;
  cfg.steps = 40;
  cfg.batch = 2;
  cfg.lr = 0.01;
  cfg.crop_frames = 0;
  cfg.log_every = 10;
  cfg.seed = 11;

  const TrainResult r = training::train_txt2vec(model, items, cfg, "", "");
  REQUIRE(r.log.size() == 40);
  for (size_t i = 0; i < r.log.size(); ++i) {
    CHECK(r.log[i].step == static_cast<int64_t>(i) + 1);
    REQUIRE(r.log[i].parts.size() == 4);
    CHECK(r.log[i].parts[0].first == "unit_ce");
    CHECK(r.log[i].parts[1].first == "pitch");
    CHECK(r.log[i].parts[2].first == "energy");
    CHECK(r.log[i].parts[3].first == "duration");
    CHECK(std::isfinite(r.log[i].total));
  }
  CHECK(training::mean_total_tail(r, 5) < training::mean_total_head(r, 5));
}

TEST_CASE("same seed gives identical txt2vec runs") {
  const auto mcfg = t2v_config();
  const std::vector<txt2vec::Txt2VecItem> items = {t2v_item(mcfg, 1),
                                                   t2v_item(mcfg, 2)};
  TrainConfig cfg;
  cfg.steps = 8;
  cfg.batch = 2;
  cfg.lr = 0.01;
  cfg.crop_frames = 6;
  cfg.log_every = 100;
  cfg.seed = 21;

  txt2vec::Txt2VecModel a(mcfg);
  txt2vec::Txt2VecModel b(mcfg);
  const TrainResult ra = training::train_txt2vec(a, items, cfg, "", "");
  const TrainResult rb = training::train_txt2vec(b, items, cfg, "", "");
  REQUIRE(ra.log.size() == rb.log.size());
  for (size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].total == rb.log[i].total);
  }
  CHECK(snapshot(a.registry()) == snapshot(b.registry()));

  // A different seed changes the trajectory.
  TrainConfig other = cfg;
  other.seed = 22;
  txt2vec::Txt2VecModel c(mcfg);
  const TrainResult rc = training::train_txt2vec(c, items, other, "", "");
  bool any_diff = false;
  for (size_t i = 0; i < rc.log.size(); ++i) {
    if (rc.log[i].total != ra.log[i].total) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("txt2vec resume reproduces the straight run bitwise") {
  TempDir tmp("resume");
  const auto mcfg = t2v_config();
  const std::vector<txt2vec::Txt2VecItem> items = {t2v_item(mcfg, 1),
                                                   t2v_item(mcfg, 2)};
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch = 2;
  cfg.lr = 0.01;
  cfg.crop_frames = 0;
  cfg.log_every = 5;
  cfg.seed = 31;

  txt2vec::Txt2VecModel straight(mcfg);
  const TrainResult rs = training::train_txt2vec(straight, items, cfg, "", "");

  const std::string log_path = tmp.file("run.log");
  const std::string ckpt_path = tmp.file("mid.ckpt");
  TrainConfig first = cfg;
  first.steps = 10;
  txt2vec::Txt2VecModel half(mcfg);
  training::train_txt2vec(half, items, first, log_path, ckpt_path);

  // A fresh model resumes from the checkpoint; its own init is overwritten.
  txt2vec::Txt2VecModel resumed(mcfg);
  const TrainResult rr =
      training::train_txt2vec(resumed, items, cfg, log_path, "", ckpt_path);
  REQUIRE(rr.log.size() == 10);
  for (size_t i = 0; i < rr.log.size(); ++i) {
    CHECK(rr.log[i].step == static_cast<int64_t>(i) + 11);
    CHECK(rr.log[i].total == rs.log[i + 10].total);
  }
  CHECK(snapshot(resumed.registry()) == snapshot(straight.registry()));

  // The resumed run appends to the log: lines at steps 5, 10, 15, 20.
  const auto lines = read_jsonl(log_path);
  REQUIRE(lines.size() == 4);
  const std::vector<int64_t> expect = {5, 10, 15, 20};
  for (size_t i = 0; i < lines.size(); ++i) {
    CHECK(lines[i].at("step").get<int64_t>() == expect[i]);
    CHECK(lines[i].contains("total"));
    CHECK(lines[i].contains("unit_ce"));
    CHECK(lines[i].contains("pitch"));
    CHECK(lines[i].contains("energy"));
    CHECK(lines[i].contains("duration"));
    CHECK(lines[i].contains("ms"));
    CHECK(lines[i].at("total").get<double>() ==
          rs.log[static_cast<size_t>(expect[i]) - 1].total);
  }
}

TEST_CASE("vec2wav training requires a frozen loss network") {
  const auto mcfg = v2w_config();
  const std::vector<vec2wav::Vec2WavItem> items = {v2w_item(mcfg, 5)};
  TrainConfig cfg;
  cfg.steps = 4;
  cfg.batch = 1;
  cfg.lr = 0.004;
  cfg.seg_frames = 0;
  cfg.log_every = 100;
  cfg.seed = 41;

  encoders::EncoderConfig pcfg;
  pcfg.n_mels = 16;
  pcfg.channels = 4;
  pcfg.kernel = 3;
  pcfg.emb_dim = 6;
  pcfg.num_classes = 2;
  pcfg.seed = 9;
  encoders::ClassifierEncoder phi(pcfg);

  vec2wav::Vec2WavModel model(mcfg);
  CHECK_THROWS_AS(training::train_vec2wav(model, items, &phi, cfg, "", ""),
                  ParamError);

  phi.freeze();
  const auto phi_before = snapshot(phi.registry());
  const TrainResult r = training::train_vec2wav(model, items, &phi, cfg, "", "");
  REQUIRE(r.log.size() == 4);
  for (const auto& rec : r.log) {
    REQUIRE(rec.parts.size() == 3);
    CHECK(rec.parts[0].first == "mel_l1");
    CHECK(rec.parts[1].first == "mr_stft");
    CHECK(rec.parts[2].first == "scl");
    CHECK(std::abs(rec.parts[2].second) <= mcfg.scl_alpha + 1e-12);
    CHECK(std::isfinite(rec.total));
  }
  CHECK(snapshot(phi.registry()) == phi_before);
}

TEST_CASE("vec2wav training descends and is seed-deterministic") {
  const auto mcfg = v2w_config();
  const std::vector<vec2wav::Vec2WavItem> items = {v2w_item(mcfg, 5),
                                                   v2w_item(mcfg, 6)};
  TrainConfig cfg;
  cfg.steps = 18;
  cfg.batch = 2;
  cfg.lr = 0.004;
  cfg.seg_frames = 0;
  cfg.log_every = 100;
  cfg.seed = 51;

  vec2wav::Vec2WavModel a(mcfg);
  const TrainResult ra = training::train_vec2wav(a, items, nullptr, cfg, "", "");
  REQUIRE(ra.log.size() == 18);
  CHECK(training::mean_total_tail(ra, 4) < training::mean_total_head(ra, 4));
  for (const auto& rec : ra.log) {
    // Without a loss network the consistency part stays exactly zero.
    CHECK(rec.parts[2].second == 0.0);
  }

  vec2wav::Vec2WavModel b(mcfg);
  const TrainResult rb = training::train_vec2wav(b, items, nullptr, cfg, "", "");
  for (size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].total == rb.log[i].total);
  }
  CHECK(snapshot(a.registry()) == snapshot(b.registry()));
}

TEST_CASE("training validates inputs and checkpoint kinds") {
  TempDir tmp("train-validate");
  const auto t2v_cfg = t2v_config();
  const auto v2w_cfg2 = v2w_config();
  const std::vector<txt2vec::Txt2VecItem> t_items = {t2v_item(t2v_cfg, 1)};
  const std::vector<vec2wav::Vec2WavItem> v_items = {v2w_item(v2w_cfg2, 5)};

  TrainConfig cfg;
  cfg.steps = 1;
  cfg.batch = 1;
  cfg.seg_frames = 0;

  txt2vec::Txt2VecModel t2v(t2v_cfg);
  vec2wav::Vec2WavModel v2w(v2w_cfg2);
  CHECK_THROWS_AS(training::train_txt2vec(t2v, {}, cfg, "", ""), ParamError);
  CHECK_THROWS_AS(training::train_vec2wav(v2w, {}, nullptr, cfg, "", ""),
                  ParamError);

  TrainConfig bad = cfg;
  bad.batch = 0;
  CHECK_THROWS_AS(training::train_txt2vec(t2v, t_items, bad, "", ""),
                  ConfigError);
  CHECK_THROWS_AS(training::train_vec2wav(v2w, v_items, nullptr, bad, "", ""),
                  ConfigError);

  // A first-stage checkpoint cannot resume the second stage and vice versa.
  const std::string t_ckpt = tmp.file("t2v.ckpt");
  training::train_txt2vec(t2v, t_items, cfg, "", t_ckpt);
  CHECK_THROWS_AS(
      training::train_vec2wav(v2w, v_items, nullptr, cfg, "", "", t_ckpt),
      FormatError);
  CHECK_THROWS_AS(
      training::train_txt2vec(t2v, t_items, cfg, "", "", tmp.file("nope.ckpt")),
      MissingArtifactError);
}

TEST_CASE("train config JSON round-trips") {
  TrainConfig cfg;
  cfg.steps = 123;
  cfg.batch = 7;
  cfg.lr = 0.0025;
  cfg.crop_frames = 40;
  cfg.seg_frames = 20;
  cfg.log_every = 3;
  cfg.seed = 99;
  const TrainConfig back = training::train_config_from_json(
      training::train_config_json(cfg));
  CHECK(back.steps == 123);
  CHECK(back.batch == 7);
  CHECK(back.lr == doctest::Approx(0.0025).epsilon(1e-15));
  CHECK(back.crop_frames == 40);
  CHECK(back.seg_frames == 20);
  CHECK(back.log_every == 3);
  CHECK(back.seed == 99);
  CHECK_THROWS_AS(training::train_config_from_json("{nope"), FormatError);
}

TEST_CASE("feature preparation aligns corpus, units, and prosody") {
  TempDir tmp("features");
  corpus::CorpusConfig ccfg;
  ccfg.num_speakers = 2;
  ccfg.num_emotions = 2;
  ccfg.utts_per_pair = 1;
  ccfg.min_phonemes = 3;
  ccfg.max_phonemes = 4;
  ccfg.min_duration = 4;
  ccfg.max_duration = 5;
  corpus::generate_corpus(ccfg, tmp.path(), 7);
  const std::string manifest = tmp.file("manifest.tsv");

  perturb::PerturbationSpec spec;
  perturb::perturb_corpus(manifest, tmp.file("perturbed"), spec, 7);
  const std::string pairs = tmp.file("perturbed/pairs.tsv");

  // Pooled unit-stream frames cap at max_frames_per_utt rows per utterance.
  const nn::Mat feats = training::collect_unit_features(manifest, pairs, 6, 16);
  const auto records = corpus::read_manifest(manifest);
  CHECK(feats.rows == static_cast<int>(records.size()) * 6);
  CHECK(feats.cols == 16);
  const nn::Mat all = training::collect_unit_features(manifest, pairs, 1000, 16);
  CHECK(all.rows > feats.rows);

  const codebook::Codebook cb = codebook::fit_codebook(feats, 4, 13, 4, 30);
  CHECK(cb.dim() == 16);

  encoders::EncoderConfig ecfg;
  ecfg.n_mels = 16;
  ecfg.channels = 4;
  ecfg.kernel = 3;
  ecfg.emb_dim = 5;
  ecfg.num_classes = 2;
  ecfg.seed = 17;
  const encoders::ClassifierEncoder emo(ecfg);

  const auto features = training::prepare_features(manifest, pairs, cb, &emo);
  REQUIRE(features.size() == records.size());
  std::set<std::string> seen;
  for (const auto& f : features) {
    seen.insert(f.utterance_id);
    const size_t frames = static_cast<size_t>(
        std::accumulate(f.durations.begin(), f.durations.end(), 0));
    CHECK(static_cast<size_t>(f.clean_mel.n_frames) == frames);
    CHECK(f.units.size() == frames);
    CHECK(f.pitch_fr.size() == frames);
    CHECK(f.energy_fr.size() == frames);
    CHECK(f.clean.samples.size() == frames * 256);
    for (int u : f.units) {
      CHECK(u >= 0);
      CHECK(u < 4);
    }
    for (double hz : f.pitch_fr) CHECK(hz > 0.0);
    for (double e : f.energy_fr) CHECK(e >= 0.0);
    CHECK(f.emo_emb.size() == 5);
  }
  CHECK(seen.size() == records.size());

  // Without an emotion encoder the embedding stays empty.
  const auto plain = training::prepare_features(manifest, pairs, cb, nullptr);
  CHECK(plain.front().emo_emb.empty());

  // Labeled mels: the clean stream needs no pairs, perturbed streams do.
  const auto spk_mels = training::labeled_mels(
      manifest, "", training::LabelKind::kSpeaker, training::AudioStream::kClean,
      16);
  REQUIRE(spk_mels.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(spk_mels[i].label == records[i].speaker_id);
    CHECK(spk_mels[i].mel.n_mels == 16);
    CHECK(spk_mels[i].mel.n_frames > 0);
  }
  const auto emo_mels = training::labeled_mels(
      manifest, pairs, training::LabelKind::kEmotion,
      training::AudioStream::kEmotionStream, 16);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(emo_mels[i].label == records[i].emotion_id);
  }
  CHECK_THROWS_AS(
      training::labeled_mels(manifest, "", training::LabelKind::kSpeaker,
                             training::AudioStream::kUnitStream, 16),
      ParamError);
}
