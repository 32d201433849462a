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

#include "crossvox/evaluation.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "crossvox/common.h"
#include "crossvox/kernels.h"
#include "crossvox/pipeline.h"

namespace crossvox::evaluation {

namespace {

dsp::MelSpectrogram encoder_mel(const Waveform& wav,
                                const encoders::ClassifierEncoder& enc) {
  dsp::MelConfig cfg;
  cfg.n_mels = enc.config().n_mels;
  if (dsp::mel_frame_count(wav.samples.size(), cfg) < 1) {
    throw ParamError("embedding_cosine: audio shorter than one analysis frame");
  }
  return dsp::mel_spectrogram(wav, cfg);
}

std::string format_fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

void validate_row(const MetricRow& row) {
  if (row.secs < -1.0 || row.secs > 1.0 || row.eecs < -1.0 || row.eecs > 1.0) {
    throw ParamError("report row '" + row.system +
                     "': secs/eecs must lie in [-1, 1]");
  }
  if (row.uer < 0.0) {
    throw ParamError("report row '" + row.system + "': uer must be >= 0");
  }
  if (row.rtf.has_value() && *row.rtf < 0.0) {
    throw ParamError("report row '" + row.system + "': rtf must be >= 0");
  }
}

std::vector<std::string> row_cells(const MetricRow& row) {
  return {row.system,
          row.speaker_group,
          row.language,
          format_fixed(row.secs, 3),
          format_fixed(row.eecs, 3),
          format_fixed(row.uer * 100.0, 2),
          row.utmos_proxy.has_value() ? format_fixed(*row.utmos_proxy, 3) : "",
          row.rtf.has_value() ? format_fixed(*row.rtf, 3) : ""};
}

const char* kColumns[] = {"system",  "speaker_group", "language",
                          "secs",    "eecs",          "uer_pct",
                          "utmos_proxy", "rtf"};
constexpr int kNumColumns = 8;

}  // namespace

double embedding_cosine(const Waveform& a, const Waveform& b,
                        const encoders::ClassifierEncoder& enc) {
  return encoders::cosine(enc.embed(encoder_mel(a, enc)),
                          enc.embed(encoder_mel(b, enc)));
}

double secs(const Waveform& a, const Waveform& b,
            const encoders::ClassifierEncoder& speaker_enc) {
  return embedding_cosine(a, b, speaker_enc);
}

double eecs(const Waveform& a, const Waveform& b,
            const encoders::ClassifierEncoder& emotion_enc) {
  return embedding_cosine(a, b, emotion_enc);
}

size_t levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  const size_t n = a.size();
  const size_t m = b.size();
  std::vector<size_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double unit_error_rate(const std::vector<int>& predicted,
                       const std::vector<int>& reference) {
  if (reference.empty()) {
    throw ParamError("unit_error_rate: reference sequence is empty");
  }
  return static_cast<double>(levenshtein(predicted, reference)) /
         static_cast<double>(reference.size());
}

double measure_rtf(const std::function<Waveform(int)>& synthesize,
                   int n_utterances) {
  if (n_utterances < 5) {
    throw ParamError("measure_rtf: need at least 5 utterances");
  }
  double audio_seconds = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n_utterances; ++i) {
    audio_seconds += synthesize(i).duration_s();
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (audio_seconds <= 0.0) {
    throw ParamError("measure_rtf: generator produced no audio");
  }
  return wall / audio_seconds;
}

std::string hardware_descriptor() {
  return "cpu " + std::to_string(std::thread::hardware_concurrency()) +
         " threads";
}

void sort_rows(std::vector<MetricRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MetricRow& a, const MetricRow& b) {
                     return std::tie(a.system, a.speaker_group, a.language) <
                            std::tie(b.system, b.speaker_group, b.language);
                   });
}

std::string render_report(const EvalReport& report, ReportFormat fmt) {
  std::vector<MetricRow> rows = report.rows;
  for (const MetricRow& row : rows) validate_row(row);
  sort_rows(rows);

  std::string out;
  if (!report.corpus_id.empty()) out += "# corpus: " + report.corpus_id + "\n";
  if (!report.hardware.empty()) out += "# hardware: " + report.hardware + "\n";
  if (!report.config_snapshot.empty()) {
    out += "# config: " + report.config_snapshot + "\n";
  }

  if (fmt == ReportFormat::kTsv) {
    for (int c = 0; c < kNumColumns; ++c) {
      out += kColumns[c];
      out += c + 1 < kNumColumns ? '\t' : '\n';
    }
    for (const MetricRow& row : rows) {
      const std::vector<std::string> cells = row_cells(row);
      for (int c = 0; c < kNumColumns; ++c) {
        out += cells[static_cast<size_t>(c)];
        out += c + 1 < kNumColumns ? '\t' : '\n';
      }
    }
    return out;
  }

  auto md_line = [&out](const std::vector<std::string>& cells) {
    out += "|";
    for (const std::string& cell : cells) {
      out += " " + cell + " |";
    }
    out += "\n";
  };
  md_line(std::vector<std::string>(kColumns, kColumns + kNumColumns));
  md_line(std::vector<std::string>(kNumColumns, "---"));
  for (const MetricRow& row : rows) md_line(row_cells(row));
  return out;
}

void emit_report(const EvalReport& report, ReportFormat fmt,
                 const std::string& path) {
  const std::string text = render_report(report, fmt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open report file " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("cannot write report file " + path);
}

std::vector<MetricRow> parse_report_tsv(const std::string& text) {
  std::vector<MetricRow> rows;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  auto to_double = [](const std::string& s, const char* field) {
    try {
      size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw FormatError(std::string("report: bad numeric field ") + field);
    }
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cells.size() != static_cast<size_t>(kNumColumns)) {
      throw FormatError("report: expected 8 tab-separated columns");
    }
    if (!saw_header) {
      for (int c = 0; c < kNumColumns; ++c) {
        if (cells[static_cast<size_t>(c)] != kColumns[c]) {
          throw FormatError("report: unexpected header column '" +
                            cells[static_cast<size_t>(c)] + "'");
        }
      }
      saw_header = true;
      continue;
    }
    MetricRow row;
    row.system = cells[0];
    row.speaker_group = cells[1];
    row.language = cells[2];
    row.secs = to_double(cells[3], "secs");
    row.eecs = to_double(cells[4], "eecs");
    row.uer = to_double(cells[5], "uer_pct") / 100.0;
    if (!cells[6].empty()) row.utmos_proxy = to_double(cells[6], "utmos_proxy");
    if (!cells[7].empty()) row.rtf = to_double(cells[7], "rtf");
    validate_row(row);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw FormatError("report: missing header line");
  return rows;
}

TransferOutcome transfer_eval(const txt2vec::Txt2VecModel& t2v,
                              const vec2wav::Vec2WavModel& v2w,
                              const encoders::ClassifierEncoder& speaker_enc,
                              const encoders::ClassifierEncoder& emotion_enc,
                              const codebook::Codebook& cb,
                              const std::vector<training::UtteranceFeatures>& corpus,
                              const TransferConfig& tcfg) {
  if (tcfg.n_cases < 1) throw ParamError("transfer_eval: n_cases must be >= 1");
  if (corpus.empty()) throw ParamError("transfer_eval: empty corpus");

  std::vector<int> speakers;
  std::vector<std::vector<int>> by_speaker;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const int s = corpus[i].speaker_id;
    auto it = std::find(speakers.begin(), speakers.end(), s);
    size_t slot;
    if (it == speakers.end()) {
      speakers.push_back(s);
      by_speaker.emplace_back();
      slot = speakers.size() - 1;
    } else {
      slot = static_cast<size_t>(it - speakers.begin());
    }
    by_speaker[slot].push_back(static_cast<int>(i));
  }
  const int n_spk = static_cast<int>(speakers.size());
  if (tcfg.cross_speaker && n_spk < 2) {
    throw ParamError("transfer_eval: cross-speaker probe needs >= 2 speakers");
  }

  struct Case {
    int target_spk = 0;  // index into speakers
    int ref_utt = 0;     // index into corpus
    int secs_utt = 0;    // clean target-speaker utterance for SECS
  };
  Rng rng(derive_seed(tcfg.seed,
                      tcfg.cross_speaker ? "transfer-cross" : "transfer-same"));
  std::vector<Case> cases(static_cast<size_t>(tcfg.n_cases));
  for (Case& c : cases) {
    c.target_spk = static_cast<int>(rng.randint(0, n_spk - 1));
    int ref_spk = c.target_spk;
    if (tcfg.cross_speaker) {
      ref_spk = (c.target_spk + 1 +
                 static_cast<int>(rng.randint(0, n_spk - 2))) % n_spk;
    }
    const auto& ref_pool = by_speaker[static_cast<size_t>(ref_spk)];
    const auto& tgt_pool = by_speaker[static_cast<size_t>(c.target_spk)];
    c.ref_utt = ref_pool[static_cast<size_t>(
        rng.randint(0, static_cast<int64_t>(ref_pool.size()) - 1))];
    c.secs_utt = tgt_pool[static_cast<size_t>(
        rng.randint(0, static_cast<int64_t>(tgt_pool.size()) - 1))];
  }

  struct CaseResult {
    bool spk_ok = false;
    bool emo_ok = false;
    double secs = 0.0;
    double eecs = 0.0;
    double uer = 0.0;
    double audio_s = 0.0;
    double synth_s = 0.0;
  };
  std::vector<CaseResult> results(cases.size());
  kernels::parallel_for(
      static_cast<int>(cases.size()), kernels::threads(), [&](int i) {
        const Case& c = cases[static_cast<size_t>(i)];
        const training::UtteranceFeatures& ref = corpus[static_cast<size_t>(c.ref_utt)];
        const training::UtteranceFeatures& tgt = corpus[static_cast<size_t>(c.secs_utt)];

        pipeline::SynthInputs in;
        in.phonemes = ref.phonemes;
        in.language = ref.language_id;
        in.style_mel = ref.clean_mel;
        in.emo_emb = emotion_enc.embed(ref.clean);
        in.speaker_id = speakers[static_cast<size_t>(c.target_spk)];

        const auto t0 = std::chrono::steady_clock::now();
        const pipeline::SynthResult gen = pipeline::synthesize(t2v, v2w, in);
        CaseResult r;
        r.synth_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        r.audio_s = gen.wav.duration_s();

        r.spk_ok = speaker_enc.classify(encoder_mel(gen.wav, speaker_enc)) ==
                   in.speaker_id;
        r.emo_ok = emotion_enc.classify(encoder_mel(gen.wav, emotion_enc)) ==
                   ref.emotion_id;
        r.secs = embedding_cosine(gen.wav, tgt.clean, speaker_enc);
        r.eecs = embedding_cosine(gen.wav, ref.clean, emotion_enc);

        dsp::MelConfig mcfg;
        mcfg.n_mels = cb.dim();
        const std::vector<int> reencoded =
            codebook::encode_units(dsp::mel_spectrogram(gen.wav, mcfg), cb);
        r.uer = unit_error_rate(reencoded, gen.units.units);
        results[static_cast<size_t>(i)] = r;
      });

  TransferOutcome out;
  double audio_s = 0.0;
  double synth_s = 0.0;
  for (const CaseResult& r : results) {
    out.speaker_acc += r.spk_ok ? 1.0 : 0.0;
    out.emotion_acc += r.emo_ok ? 1.0 : 0.0;
    out.mean_secs += r.secs;
    out.mean_eecs += r.eecs;
    out.mean_uer += r.uer;
    audio_s += r.audio_s;
    synth_s += r.synth_s;
  }
  const double inv = 1.0 / static_cast<double>(cases.size());
  out.speaker_acc *= inv;
  out.emotion_acc *= inv;
  out.mean_secs *= inv;
  out.mean_eecs *= inv;
  out.mean_uer *= inv;
  out.rtf = audio_s > 0.0 ? synth_s / audio_s : 0.0;
  return out;
}

}  // namespace crossvox::evaluation
