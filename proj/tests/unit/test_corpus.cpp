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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <tuple>

#include "crossvox/corpus.h"
#include "crossvox/dsp.h"
#include "crossvox/wav.h"
#include "doctest.h"
#include "test_support.h"

using namespace crossvox;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

corpus::CorpusConfig tiny_config() {
  corpus::CorpusConfig cfg;
  cfg.num_speakers = 2;
  cfg.num_emotions = 2;
  cfg.utts_per_pair = 2;
  cfg.min_phonemes = 3;
  cfg.max_phonemes = 5;
  cfg.min_duration = 4;
  cfg.max_duration = 6;
  return cfg;
}

}  // namespace

TEST_CASE("contour_value has mean 1 and matches its shape") {
  const int n = 2000;
  for (auto shape :
       {corpus::ContourShape::kFlat, corpus::ContourShape::kRising,
        corpus::ContourShape::kFalling, corpus::ContourShape::kOscillating}) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) / n;
      const double v = corpus::contour_value(shape, t);
      CHECK(v > 0.0);
      mean += v;
    }
    mean /= n;
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-3));
  }
  CHECK(corpus::contour_value(corpus::ContourShape::kFlat, 0.3) == 1.0);
  CHECK(corpus::contour_value(corpus::ContourShape::kRising, 0.9) >
        corpus::contour_value(corpus::ContourShape::kRising, 0.1));
  CHECK(corpus::contour_value(corpus::ContourShape::kFalling, 0.9) <
        corpus::contour_value(corpus::ContourShape::kFalling, 0.1));
}

TEST_CASE("apportion_durations conserves the scaled total with a frame floor") {
  std::vector<int> base = {5, 7, 6, 9};
  const int base_total = std::accumulate(base.begin(), base.end(), 0);
  for (double rate : {0.5, 0.8, 1.0, 1.3, 2.0}) {
    const auto eff = corpus::apportion_durations(base, rate);
    REQUIRE(eff.size() == base.size());
    int total = 0;
    for (int d : eff) {
      CHECK(d >= 1);
      total += d;
    }
    CHECK(total == static_cast<int>(std::lround(base_total * rate)));
  }
  // Identity rate keeps the exact base values.
  CHECK(corpus::apportion_durations(base, 1.0) == base);
  // Extreme compression still leaves one frame per phoneme.
  const auto floor4 = corpus::apportion_durations(base, 0.05);
  CHECK(floor4 == std::vector<int>{1, 1, 1, 1});
}

TEST_CASE("speaker profiles share formant scale and emotions only move prosody") {
  auto cfg = tiny_config();
  cfg.num_speakers = 4;
  cfg.num_emotions = 4;
  std::set<double> pitches;
  for (int s = 0; s < 4; ++s) {
    const auto prof = corpus::make_speaker_profile(s, cfg);
    CHECK(prof.id == s);
    // One vocal-tract scale: f2/f1 and f3/f1 ratios fixed across speakers.
    CHECK(prof.f2 / prof.f1 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(prof.f3 / prof.f1 == doctest::Approx(5.0).epsilon(1e-9));
    pitches.insert(prof.base_pitch);
  }
  CHECK(pitches.size() == 4);
  std::set<std::tuple<double, double, double>> prosody;
  for (int e = 0; e < 4; ++e) {
    const auto emo = corpus::make_emotion_profile(e, cfg);
    CHECK(emo.id == e);
    CHECK(emo.pitch_gain > 0.0);
    CHECK(emo.energy_gain > 0.0);
    CHECK(emo.rate_factor > 0.0);
    prosody.insert({emo.pitch_gain, emo.energy_gain, emo.rate_factor});
  }
  CHECK(prosody.size() == 4);  // all emotions distinguishable
}

TEST_CASE("speaker_language splits the roster in half") {
  CHECK(corpus::speaker_language(0, 4) == 0);
  CHECK(corpus::speaker_language(1, 4) == 0);
  CHECK(corpus::speaker_language(2, 4) == 1);
  CHECK(corpus::speaker_language(3, 4) == 1);
  CHECK(corpus::speaker_language(0, 2) == 0);
  CHECK(corpus::speaker_language(1, 2) == 1);
}

TEST_CASE("render_utterance length equals frame total times hop") {
  corpus::UtteranceSpec spec;
  spec.phonemes = {3, 11, 7};
  spec.durations = {5, 6, 4};
  corpus::RenderConfig rc;
  const auto speaker = corpus::make_speaker_profile(1, tiny_config());
  auto emotion = corpus::make_emotion_profile(2, tiny_config());
  const auto out = corpus::render_utterance(spec, speaker, emotion, rc, 42);
  const int frames = std::accumulate(out.eff_durations.begin(),
                                     out.eff_durations.end(), 0);
  CHECK(out.wav.samples.size() == static_cast<size_t>(frames) * rc.hop);
  CHECK(out.wav.sample_rate == rc.sample_rate);
  double peak = 0.0;
  for (double s : out.wav.samples) peak = std::max(peak, std::abs(s));
  CHECK(peak <= 1.0);
  CHECK(peak > 0.01);

  // Same seed renders bit-identically; different seed does not.
  const auto again = corpus::render_utterance(spec, speaker, emotion, rc, 42);
  CHECK(again.wav.samples == out.wav.samples);
  const auto other = corpus::render_utterance(spec, speaker, emotion, rc, 43);
  CHECK(other.wav.samples != out.wav.samples);
}

TEST_CASE("rendered pitch tracks the speaker base pitch and emotion gain") {
  corpus::UtteranceSpec spec;
  spec.phonemes = {5};
  spec.durations = {60};
  corpus::RenderConfig rc;
  auto speaker = corpus::make_speaker_profile(0, tiny_config());
  speaker.base_pitch = 140.0;
  corpus::EmotionProfile emo;
  emo.shape = corpus::ContourShape::kFlat;
  emo.pitch_gain = 1.25;
  const auto out = corpus::render_utterance(spec, speaker, emo, rc, 9);
  const auto track = dsp::extract_pitch(out.wav);
  int voiced = 0;
  for (double f : track.f0)
    if (f > 0.0) ++voiced;
  REQUIRE(voiced > 10);
  CHECK(dsp::median_pitch(track) ==
        doctest::Approx(140.0 * 1.25).epsilon(0.05));
}

TEST_CASE("generate_corpus writes a readable manifest and wav files") {
  TempDir tmp("corpus");
  const auto cfg = tiny_config();
  const auto records = corpus::generate_corpus(cfg, tmp.path(), 17);
  CHECK(records.size() ==
        static_cast<size_t>(cfg.num_speakers * cfg.num_emotions *
                            cfg.utts_per_pair));

  std::set<std::string> ids;
  int lang_counts[2] = {0, 0};
  for (const auto& r : records) {
    ids.insert(r.utterance_id);
    CHECK(r.speaker_id >= 0);
    CHECK(r.speaker_id < cfg.num_speakers);
    CHECK(r.emotion_id >= 0);
    CHECK(r.emotion_id < cfg.num_emotions);
    CHECK(r.language_id ==
          corpus::speaker_language(r.speaker_id, cfg.num_speakers));
    ++lang_counts[r.language_id];
    REQUIRE(r.phonemes.size() == r.durations.size());
    CHECK(static_cast<int>(r.phonemes.size()) >= cfg.min_phonemes);
    CHECK(static_cast<int>(r.phonemes.size()) <= cfg.max_phonemes);
    for (int p : r.phonemes) {
      CHECK(p >= 0);
      CHECK(p < cfg.phoneme_vocab);
    }

    // Alignment invariant: stored durations are mel frames of the audio.
    const std::string wav_path =
        corpus::manifest_join(tmp.file("manifest.tsv"), r.wav_path);
    const auto wav = load_wav(wav_path);
    CHECK(wav.sample_rate == cfg.sample_rate);
    const int frames = std::accumulate(r.durations.begin(), r.durations.end(), 0);
    CHECK(wav.samples.size() == static_cast<size_t>(frames) * cfg.hop);
  }
  CHECK(ids.size() == records.size());
  CHECK(lang_counts[0] == lang_counts[1]);

  // Round-trip: read_manifest returns exactly what generate_corpus reported.
  const auto loaded = corpus::read_manifest(tmp.file("manifest.tsv"));
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].utterance_id == records[i].utterance_id);
    CHECK(loaded[i].wav_path == records[i].wav_path);
    CHECK(loaded[i].speaker_id == records[i].speaker_id);
    CHECK(loaded[i].emotion_id == records[i].emotion_id);
    CHECK(loaded[i].language_id == records[i].language_id);
    CHECK(loaded[i].phonemes == records[i].phonemes);
    CHECK(loaded[i].durations == records[i].durations);
  }
}

TEST_CASE("generate_corpus is deterministic in the seed") {
  TempDir t1("corpus_a");
  TempDir t2("corpus_b");
  TempDir t3("corpus_c");
  const auto cfg = tiny_config();
  const auto r1 = corpus::generate_corpus(cfg, t1.path(), 5);
  const auto r2 = corpus::generate_corpus(cfg, t2.path(), 5);
  const auto r3 = corpus::generate_corpus(cfg, t3.path(), 6);
  REQUIRE(r1.size() == r2.size());
  bool any_diff = false;
  for (size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].phonemes == r2[i].phonemes);
    CHECK(r1[i].durations == r2[i].durations);
    const auto w1 = load_wav(corpus::manifest_join(t1.file("manifest.tsv"),
                                                   r1[i].wav_path));
    const auto w2 = load_wav(corpus::manifest_join(t2.file("manifest.tsv"),
                                                   r2[i].wav_path));
    CHECK(w1.samples == w2.samples);
    if (i < r3.size() && r1[i].phonemes != r3[i].phonemes) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("manifest rejects malformed rows") {
  TempDir tmp("manifest_bad");
  const std::string path = tmp.file("manifest.tsv");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("u0\twavs/u0.wav\t0\t1\n", f);  // too few columns
    std::fclose(f);
  }
  CHECK_THROWS_AS(corpus::read_manifest(path), FormatError);

  const std::string path2 = tmp.file("manifest2.tsv");
  {
    std::FILE* f = std::fopen(path2.c_str(), "w");
    REQUIRE(f != nullptr);
    // Right column count but a non-numeric id field.
    std::fputs("u0\twavs/u0.wav\tzero\t1\t0\t1 2\t5 6\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(corpus::read_manifest(path2), FormatError);
  CHECK_THROWS_AS(corpus::read_manifest(tmp.file("missing.tsv")),
                  MissingArtifactError);
}

TEST_CASE("render_utterance validates its spec") {
  corpus::RenderConfig rc;
  const auto speaker = corpus::make_speaker_profile(0, tiny_config());
  const auto emotion = corpus::make_emotion_profile(0, tiny_config());
  corpus::UtteranceSpec mismatch;
  mismatch.phonemes = {1, 2};
  mismatch.durations = {5};
  CHECK_THROWS_AS(
      corpus::render_utterance(mismatch, speaker, emotion, rc, 1), ParamError);
  corpus::UtteranceSpec empty;
  CHECK_THROWS_AS(corpus::render_utterance(empty, speaker, emotion, rc, 1),
                  ParamError);
}
