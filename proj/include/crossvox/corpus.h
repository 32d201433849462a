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

#ifndef CROSSVOX_CORPUS_H_
#define CROSSVOX_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "crossvox/wav.h"

namespace crossvox::corpus {

// Speaker identity is carried by the vocal-tract scale alone: all three
// formant centers share one scale factor per speaker. Base pitches of
// different speakers overlap with emotion-driven pitch excursions so that
// pitch is not a usable speaker cue.
struct SpeakerProfile {
  int id = 0;
  double f1 = 500.0;
  double f2 = 1500.0;
  double f3 = 2500.0;
  double base_pitch = 150.0;
};

enum class ContourShape { kFlat, kRising, kFalling, kOscillating };

// Emotion identity is carried by prosody alone: pitch contour shape and
// level, energy level, and speaking rate. None of these move formants.
struct EmotionProfile {
  int id = 0;
  ContourShape shape = ContourShape::kFlat;
  double pitch_gain = 1.0;
  double energy_gain = 1.0;
  double rate_factor = 1.0;  // duration multiplier; > 1 means slower speech
};

struct UtteranceSpec {
  std::vector<int> phonemes;
  std::vector<int> durations;  // base frames per phoneme, before rate_factor
};

struct RenderConfig {
  int sample_rate = 16000;
  int hop = 256;
  int phoneme_vocab = 32;
};

struct RenderedUtterance {
  Waveform wav;
  std::vector<int> eff_durations;  // post-rate frames; sum * hop == length
};

// Multiplicative pitch contour over normalized time, mean 1 on [0, 1].
double contour_value(ContourShape shape, double t_norm);

// Phoneme identity lives in the second and third formant offsets; the first
// formant is left untouched so the strongest low-band envelope peak stays a
// pure speaker cue. Offsets are a fixed function of the phoneme id.
double phoneme_f2_offset(int phoneme);
double phoneme_f3_offset(int phoneme);
double phoneme_amp(int phoneme);

// Largest-remainder apportionment of base durations scaled by rate_factor.
// Every effective duration is >= 1 and the total equals
// lround(sum(base) * rate_factor) whenever that total allows one frame per
// phoneme.
std::vector<int> apportion_durations(const std::vector<int>& base,
                                     double rate_factor);

RenderedUtterance render_utterance(const UtteranceSpec& spec,
                                   const SpeakerProfile& speaker,
                                   const EmotionProfile& emotion,
                                   const RenderConfig& cfg, uint64_t seed);

struct CorpusConfig {
  int num_speakers = 4;
  int num_emotions = 4;
  int utts_per_pair = 50;
  int phoneme_vocab = 32;
  int sample_rate = 16000;
  int hop = 256;
  int min_phonemes = 8;
  int max_phonemes = 12;
  int min_duration = 5;  // base frames per phoneme
  int max_duration = 9;
};

struct ManifestRecord {
  std::string utterance_id;
  std::string wav_path;  // relative to the manifest's directory
  int speaker_id = 0;
  int emotion_id = 0;
  int language_id = 0;
  std::vector<int> phonemes;
  std::vector<int> durations;  // effective frames; sum == mel frame count
};

SpeakerProfile make_speaker_profile(int id, const CorpusConfig& cfg);
EmotionProfile make_emotion_profile(int id, const CorpusConfig& cfg);
// Speakers 0..S/2-1 speak language 0, the rest language 1.
int speaker_language(int speaker_id, int num_speakers);

// Writes out_dir/wavs/<utterance_id>.wav for every record plus
// out_dir/manifest.tsv, and returns the records in manifest order.
std::vector<ManifestRecord> generate_corpus(const CorpusConfig& cfg,
                                            const std::string& out_dir,
                                            uint64_t seed);

std::vector<ManifestRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path,
                    const std::vector<ManifestRecord>& records);
// Joins a wav_path stored in a manifest with the manifest's directory.
std::string manifest_join(const std::string& manifest_path,
                          const std::string& wav_path);

}  // namespace crossvox::corpus

#endif  // CROSSVOX_CORPUS_H_
