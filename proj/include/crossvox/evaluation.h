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

#ifndef CROSSVOX_EVALUATION_H_
#define CROSSVOX_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crossvox/codebook.h"
#include "crossvox/encoders.h"
#include "crossvox/training.h"
#include "crossvox/txt2vec.h"
#include "crossvox/vec2wav.h"
#include "crossvox/wav.h"

namespace crossvox::evaluation {

// Cosine similarity of the encoder embeddings of two clips; symmetric,
// in [-1, 1], exactly 1 for identical inputs. Throws ParamError when a clip
// is shorter than one analysis frame.
double embedding_cosine(const Waveform& a, const Waveform& b,
                        const encoders::ClassifierEncoder& enc);
// Speaker / emotion embedding cosine similarity.
double secs(const Waveform& a, const Waveform& b,
            const encoders::ClassifierEncoder& speaker_enc);
double eecs(const Waveform& a, const Waveform& b,
            const encoders::ClassifierEncoder& emotion_enc);

size_t levenshtein(const std::vector<int>& a, const std::vector<int>& b);

// Edit distance over unit ids divided by reference length; 0 iff equal.
// Empty reference is an error.
double unit_error_rate(const std::vector<int>& predicted,
                       const std::vector<int>& reference);

// Total synthesis wall-clock divided by total generated audio seconds.
// synthesize(i) must return the audio for utterance i. Needs >= 5 utterances.
double measure_rtf(const std::function<Waveform(int)>& synthesize,
                   int n_utterances);

// Short human-readable machine descriptor attached to reports.
std::string hardware_descriptor();

struct MetricRow {
  std::string system;
  std::string speaker_group;
  std::string language;
  double secs = 0.0;  // in [-1, 1]
  double eecs = 0.0;  // in [-1, 1]
  double uer = 0.0;   // fraction; rendered as percent
  std::optional<double> utmos_proxy;  // blank unless a proxy is supplied
  std::optional<double> rtf;
};

struct EvalReport {
  std::vector<MetricRow> rows;
  std::string corpus_id;
  std::string hardware;
  std::string config_snapshot;
};

enum class ReportFormat { kTsv, kMarkdown };

// Stable sort by (system, speaker_group, language).
void sort_rows(std::vector<MetricRow>& rows);

// Deterministic byte output: metadata comment lines (only when non-empty),
// a header, then one line per row in sorted order. Rows are validated
// against the declared ranges first.
std::string render_report(const EvalReport& report, ReportFormat fmt);
void emit_report(const EvalReport& report, ReportFormat fmt,
                 const std::string& path);

// Inverse of the TSV rendering: skips '#' metadata lines, checks the header,
// and parses rows (formatted precision is all that survives).
std::vector<MetricRow> parse_report_tsv(const std::string& text);

// Cross-speaker emotion-transfer probe: each case synthesizes with a target
// speaker id and a reference utterance from another speaker (same speaker
// when cross_speaker is false), whose mel also serves as the style input.
struct TransferConfig {
  int n_cases = 100;
  bool cross_speaker = true;
  uint64_t seed = 1;
};

struct TransferOutcome {
  double speaker_acc = 0.0;  // classifier picks the target speaker
  double emotion_acc = 0.0;  // classifier picks the reference emotion
  double mean_secs = 0.0;    // generated vs clean target-speaker utterance
  double mean_eecs = 0.0;    // generated vs reference utterance
  double mean_uer = 0.0;     // re-encoded units vs requested units
  double rtf = 0.0;
};

TransferOutcome transfer_eval(const txt2vec::Txt2VecModel& t2v,
                              const vec2wav::Vec2WavModel& v2w,
                              const encoders::ClassifierEncoder& speaker_enc,
                              const encoders::ClassifierEncoder& emotion_enc,
                              const codebook::Codebook& cb,
                              const std::vector<training::UtteranceFeatures>& corpus,
                              const TransferConfig& tcfg);

}  // namespace crossvox::evaluation

#endif  // CROSSVOX_EVALUATION_H_
