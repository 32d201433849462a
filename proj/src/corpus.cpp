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

#include "crossvox/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "crossvox/common.h"
#include "crossvox/kernels.h"

namespace crossvox::corpus {

namespace {

constexpr double kContourSwing = 0.2;
constexpr double kTargetRms = 0.055;
constexpr double kBreathNoise = 0.002;
constexpr int kTransitionSamples = 160;  // 10 ms at 16 kHz
constexpr double kBandwidths[3] = {90.0, 110.0, 170.0};
constexpr double kFormantGains[3] = {1.0, 0.6, 0.35};

// Fixed per-phoneme parameter derived from the id only, independent of any
// corpus seed, so phoneme identity is stable across configurations.
double phoneme_unit(int phoneme, uint64_t salt) {
  const uint64_t h = mix64(static_cast<uint64_t>(phoneme) * 0x9e3779b97f4a7c15ULL + salt);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double step(double x, double freq, double bandwidth, int sample_rate) {
    const double r = std::exp(-std::numbers::pi * bandwidth / sample_rate);
    const double theta = 2.0 * std::numbers::pi * freq / sample_rate;
    const double y = (1.0 - r) * x + 2.0 * r * std::cos(theta) * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

void validate_profiles(const SpeakerProfile& sp, const EmotionProfile& em,
                       const RenderConfig& cfg) {
  if (cfg.sample_rate <= 0 || cfg.hop <= 0 || cfg.phoneme_vocab <= 0) {
    throw ConfigError("render: non-positive sample_rate, hop, or vocab");
  }
  const double nyquist = cfg.sample_rate / 2.0;
  if (!(sp.f1 < sp.f2 && sp.f2 < sp.f3)) {
    throw ConfigError("render: speaker formants must be ordered f1 < f2 < f3");
  }
  if (sp.f1 < 200.0 || sp.f3 > 4000.0 || sp.f3 >= nyquist) {
    throw ConfigError("render: speaker formants outside [200, 4000] Hz or above Nyquist");
  }
  if (sp.base_pitch < 80.0 || sp.base_pitch > 300.0) {
    throw ConfigError("render: speaker base pitch outside [80, 300] Hz");
  }
  if (em.pitch_gain <= 0.0 || em.energy_gain <= 0.0 || em.rate_factor <= 0.0) {
    throw ConfigError("render: emotion gains must be positive");
  }
}

}  // namespace

double contour_value(ContourShape shape, double t_norm) {
  const double t = std::clamp(t_norm, 0.0, 1.0);
  switch (shape) {
    case ContourShape::kFlat:
      return 1.0;
    case ContourShape::kRising:
      return 1.0 + kContourSwing * (2.0 * t - 1.0);
    case ContourShape::kFalling:
      return 1.0 - kContourSwing * (2.0 * t - 1.0);
    case ContourShape::kOscillating:
      return 1.0 + kContourSwing * std::sin(4.0 * std::numbers::pi * t);
  }
  return 1.0;
}

double phoneme_f2_offset(int phoneme) {
  return 0.75 + 0.55 * phoneme_unit(phoneme, 0x5eedf00d01ULL);
}

double phoneme_f3_offset(int phoneme) {
  return 0.92 + 0.16 * phoneme_unit(phoneme, 0x5eedf00d02ULL);
}

double phoneme_amp(int phoneme) {
  return 0.8 + 0.4 * phoneme_unit(phoneme, 0x5eedf00d03ULL);
}

std::vector<int> apportion_durations(const std::vector<int>& base,
                                     double rate_factor) {
  if (base.empty()) throw ParamError("apportion_durations: empty durations");
  if (rate_factor <= 0.0) throw ParamError("apportion_durations: rate <= 0");
  const int n = static_cast<int>(base.size());
  double total_target = 0.0;
  std::vector<double> q(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (base[static_cast<size_t>(i)] < 1) {
      throw ParamError("apportion_durations: duration < 1 frame");
    }
    q[static_cast<size_t>(i)] = base[static_cast<size_t>(i)] * rate_factor;
    total_target += q[static_cast<size_t>(i)];
  }
  const int total = static_cast<int>(std::lround(total_target));

  std::vector<int> eff(static_cast<size_t>(n));
  std::vector<double> rem(static_cast<size_t>(n));
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    eff[static_cast<size_t>(i)] = static_cast<int>(std::floor(q[static_cast<size_t>(i)]));
    rem[static_cast<size_t>(i)] = q[static_cast<size_t>(i)] - eff[static_cast<size_t>(i)];
    assigned += eff[static_cast<size_t>(i)];
  }
  int extra = total - assigned;
  while (extra > 0) {
    int pick = 0;
    for (int i = 1; i < n; ++i) {
      if (rem[static_cast<size_t>(i)] > rem[static_cast<size_t>(pick)]) pick = i;
    }
    eff[static_cast<size_t>(pick)] += 1;
    rem[static_cast<size_t>(pick)] -= 1.0;
    --extra;
  }
  // One frame minimum per phoneme, funded by the largest slot.
  for (int i = 0; i < n; ++i) {
    while (eff[static_cast<size_t>(i)] < 1) {
      int donor = -1;
      for (int j = 0; j < n; ++j) {
        if (eff[static_cast<size_t>(j)] > 1 &&
            (donor < 0 || eff[static_cast<size_t>(j)] > eff[static_cast<size_t>(donor)])) {
          donor = j;
        }
      }
      if (donor < 0) {
        eff[static_cast<size_t>(i)] = 1;  // degenerate tiny utterance
        break;
      }
      eff[static_cast<size_t>(donor)] -= 1;
      eff[static_cast<size_t>(i)] += 1;
    }
  }
  return eff;
}

RenderedUtterance render_utterance(const UtteranceSpec& spec,
                                   const SpeakerProfile& speaker,
                                   const EmotionProfile& emotion,
                                   const RenderConfig& cfg, uint64_t seed) {
  validate_profiles(speaker, emotion, cfg);
  if (spec.phonemes.empty() || spec.phonemes.size() != spec.durations.size()) {
    throw ParamError("render: phoneme and duration lengths differ or are empty");
  }
  for (int p : spec.phonemes) {
    if (p < 0 || p >= cfg.phoneme_vocab) {
      throw ParamError("render: phoneme id out of range");
    }
  }

  RenderedUtterance out;
  out.eff_durations = apportion_durations(spec.durations, emotion.rate_factor);
  const int n_ph = static_cast<int>(spec.phonemes.size());
  int total_frames = 0;
  for (int d : out.eff_durations) total_frames += d;
  const size_t n = static_cast<size_t>(total_frames) * cfg.hop;

  // Per-sample phoneme index and boundary positions.
  std::vector<int> ph_at(n);
  std::vector<size_t> bounds(static_cast<size_t>(n_ph + 1), 0);
  {
    size_t pos = 0;
    for (int i = 0; i < n_ph; ++i) {
      bounds[static_cast<size_t>(i)] = pos;
      pos += static_cast<size_t>(out.eff_durations[static_cast<size_t>(i)]) * cfg.hop;
    }
    bounds[static_cast<size_t>(n_ph)] = pos;
    for (int i = 0; i < n_ph; ++i) {
      for (size_t s = bounds[static_cast<size_t>(i)]; s < bounds[static_cast<size_t>(i + 1)]; ++s) {
        ph_at[s] = i;
      }
    }
  }

  auto param_at = [&](size_t s, auto getter) {
    const int i = ph_at[s];
    const double own = getter(spec.phonemes[static_cast<size_t>(i)]);
    // Linear crossfade into the next phoneme over the transition window.
    const size_t end = bounds[static_cast<size_t>(i + 1)];
    if (i + 1 < n_ph && end - s < static_cast<size_t>(kTransitionSamples) / 2) {
      const double nxt = getter(spec.phonemes[static_cast<size_t>(i + 1)]);
      const double mix = 0.5 - static_cast<double>(end - s) / kTransitionSamples;
      return own + (nxt - own) * mix;
    }
    const size_t begin = bounds[static_cast<size_t>(i)];
    if (i > 0 && s - begin < static_cast<size_t>(kTransitionSamples) / 2) {
      const double prv = getter(spec.phonemes[static_cast<size_t>(i - 1)]);
      const double mix = 0.5 - static_cast<double>(s - begin) / kTransitionSamples;
      return own + (prv - own) * mix;
    }
    return own;
  };

  Rng rng(seed);
  std::vector<double> y(n, 0.0);
  Resonator res[3];
  double phase = 1.0;  // emits a pulse at sample 0
  double pulse_jitter = 1.0;
  for (size_t s = 0; s < n; ++s) {
    const double t_norm = static_cast<double>(s) / static_cast<double>(n);
    const double f0 = speaker.base_pitch * emotion.pitch_gain *
                      contour_value(emotion.shape, t_norm) * pulse_jitter;
    phase += f0 / cfg.sample_rate;
    double exc = kBreathNoise * rng.uniform(-1.0, 1.0);
    if (phase >= 1.0) {
      phase -= 1.0;
      exc += 1.0;
      pulse_jitter = rng.uniform(0.995, 1.005);
    }
    const double freqs[3] = {
        speaker.f1,
        speaker.f2 * param_at(s, phoneme_f2_offset),
        speaker.f3 * param_at(s, phoneme_f3_offset),
    };
    const double amp = param_at(s, phoneme_amp);
    double v = 0.0;
    for (int j = 0; j < 3; ++j) {
      v += kFormantGains[j] * res[j].step(exc, freqs[j], kBandwidths[j], cfg.sample_rate);
    }
    y[s] = amp * v;
  }

  // Edge fades kill onset/offset clicks.
  const size_t fade = std::min<size_t>(n / 2, 80);
  for (size_t s = 0; s < fade; ++s) {
    const double g = static_cast<double>(s) / static_cast<double>(fade);
    y[s] *= g;
    y[n - 1 - s] *= g;
  }

  // Energy is an emotion cue: normalize RMS to a fixed target scaled by the
  // emotion's energy gain rather than per-utterance peak.
  double rms = 0.0;
  for (double v : y) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(n));
  double scale = rms > 1e-12 ? kTargetRms * emotion.energy_gain / rms : 1.0;
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak * scale > 0.98) scale = 0.98 / peak;
  for (double& v : y) v *= scale;

  out.wav.sample_rate = cfg.sample_rate;
  out.wav.samples = std::move(y);
  return out;
}

SpeakerProfile make_speaker_profile(int id, const CorpusConfig& cfg) {
  if (cfg.num_speakers < 2) throw ConfigError("corpus: need at least 2 speakers");
  if (id < 0 || id >= cfg.num_speakers) throw ConfigError("corpus: speaker id out of range");
  const double u = static_cast<double>(id) / (cfg.num_speakers - 1);
  const double scale = 0.82 + 0.36 * u;
  SpeakerProfile sp;
  sp.id = id;
  sp.f1 = 500.0 * scale;
  sp.f2 = 1500.0 * scale;
  sp.f3 = 2500.0 * scale;
  sp.base_pitch = 144.0 + 15.0 * u;
  return sp;
}

EmotionProfile make_emotion_profile(int id, const CorpusConfig& cfg) {
  if (cfg.num_emotions < 2) throw ConfigError("corpus: need at least 2 emotions");
  if (id < 0 || id >= cfg.num_emotions) throw ConfigError("corpus: emotion id out of range");
  static const EmotionProfile kTemplates[4] = {
      {0, ContourShape::kFlat, 1.00, 1.00, 1.00},
      {1, ContourShape::kRising, 1.18, 1.25, 1.12},
      {2, ContourShape::kFalling, 0.88, 0.75, 0.90},
      {3, ContourShape::kOscillating, 1.24, 1.10, 1.04},
  };
  EmotionProfile em = kTemplates[id % 4];
  em.id = id;
  // Extra emotions reuse contour shapes with slightly shifted gains so every
  // profile stays distinct.
  const int round = id / 4;
  if (round > 0) {
    em.pitch_gain *= 1.0 + 0.04 * round;
    em.energy_gain *= 1.0 - 0.05 * round;
    em.rate_factor *= 1.0 + 0.03 * round;
  }
  return em;
}

int speaker_language(int speaker_id, int num_speakers) {
  return speaker_id < (num_speakers + 1) / 2 ? 0 : 1;
}

std::vector<ManifestRecord> generate_corpus(const CorpusConfig& cfg,
                                            const std::string& out_dir,
                                            uint64_t seed) {
  if (cfg.num_speakers < 2) throw ConfigError("corpus: num_speakers must be >= 2");
  if (cfg.num_emotions < 2) throw ConfigError("corpus: num_emotions must be >= 2");
  if (cfg.utts_per_pair < 1) throw ConfigError("corpus: utts_per_pair must be >= 1");
  if (cfg.phoneme_vocab < 8) throw ConfigError("corpus: phoneme_vocab must be >= 8");
  if (cfg.min_phonemes < 1 || cfg.max_phonemes < cfg.min_phonemes) {
    throw ConfigError("corpus: invalid phoneme count range");
  }
  if (cfg.min_duration < 1 || cfg.max_duration < cfg.min_duration) {
    throw ConfigError("corpus: invalid duration range");
  }

  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "wavs", ec);
  if (ec) throw IoError("corpus: cannot create " + (root / "wavs").string());

  RenderConfig rcfg;
  rcfg.sample_rate = cfg.sample_rate;
  rcfg.hop = cfg.hop;
  rcfg.phoneme_vocab = cfg.phoneme_vocab;

  struct Job {
    ManifestRecord rec;
    UtteranceSpec spec;
    SpeakerProfile sp;
    EmotionProfile em;
    uint64_t render_seed = 0;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < cfg.num_speakers; ++s) {
    const SpeakerProfile sp = make_speaker_profile(s, cfg);
    const int lang = speaker_language(s, cfg.num_speakers);
    for (int e = 0; e < cfg.num_emotions; ++e) {
      const EmotionProfile em = make_emotion_profile(e, cfg);
      for (int k = 0; k < cfg.utts_per_pair; ++k) {
        char idbuf[64];
        std::snprintf(idbuf, sizeof(idbuf), "u%02d_%02d_%04d", s, e, k);
        Job job;
        job.rec.utterance_id = idbuf;
        job.rec.wav_path = std::string("wavs/") + idbuf + ".wav";
        job.rec.speaker_id = s;
        job.rec.emotion_id = e;
        job.rec.language_id = lang;
        job.sp = sp;
        job.em = em;
        job.render_seed = derive_seed(seed, std::string(idbuf) + "#render");

        Rng rng(derive_seed(seed, idbuf));
        const int n_ph = rng.randint(cfg.min_phonemes, cfg.max_phonemes);
        // Languages share the inventory but differ sharply in frequency:
        // each language spends 80% of its mass on its own half of the vocab.
        const int half = cfg.phoneme_vocab / 2;
        for (int i = 0; i < n_ph; ++i) {
          int p;
          if (rng.uniform() < 0.8) {
            p = lang == 0 ? rng.randint(0, half - 1)
                          : rng.randint(half, cfg.phoneme_vocab - 1);
          } else {
            p = lang == 0 ? rng.randint(half, cfg.phoneme_vocab - 1)
                          : rng.randint(0, half - 1);
          }
          job.spec.phonemes.push_back(p);
          job.spec.durations.push_back(rng.randint(cfg.min_duration, cfg.max_duration));
        }
        jobs.push_back(std::move(job));
      }
    }
  }

  kernels::parallel_for(static_cast<int>(jobs.size()), kernels::threads(), [&](int i) {
    Job& job = jobs[static_cast<size_t>(i)];
    RenderedUtterance ru =
        render_utterance(job.spec, job.sp, job.em, rcfg, job.render_seed);
    job.rec.phonemes = job.spec.phonemes;
    job.rec.durations = ru.eff_durations;
    save_wav((root / job.rec.wav_path).string(), ru.wav);
  });

  std::vector<ManifestRecord> records;
  records.reserve(jobs.size());
  for (Job& job : jobs) records.push_back(std::move(job.rec));
  write_manifest((root / "manifest.tsv").string(), records);
  return records;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(v[static_cast<size_t>(i)]);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, const std::string& where) {
  std::vector<int> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) {
    try {
      size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw FormatError("manifest: bad integer '" + tok + "' in " + where);
    }
  }
  return out;
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("manifest not found: " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() != 7) {
      throw FormatError("manifest: expected 7 tab-separated columns at line " +
                        std::to_string(lineno) + ", got " +
                        std::to_string(cols.size()));
    }
    const std::string where = "line " + std::to_string(lineno);
    ManifestRecord rec;
    rec.utterance_id = cols[0];
    rec.wav_path = cols[1];
    const std::vector<int> ids =
        parse_ints(cols[2] + " " + cols[3] + " " + cols[4], where);
    if (ids.size() != 3) throw FormatError("manifest: bad id columns at " + where);
    rec.speaker_id = ids[0];
    rec.emotion_id = ids[1];
    rec.language_id = ids[2];
    rec.phonemes = parse_ints(cols[5], where);
    rec.durations = parse_ints(cols[6], where);
    if (rec.phonemes.empty() || rec.phonemes.size() != rec.durations.size()) {
      throw FormatError("manifest: phoneme/duration length mismatch at " + where);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("manifest: cannot write " + path);
  for (const ManifestRecord& rec : records) {
    out << rec.utterance_id << '\t' << rec.wav_path << '\t' << rec.speaker_id
        << '\t' << rec.emotion_id << '\t' << rec.language_id << '\t'
        << join_ints(rec.phonemes) << '\t' << join_ints(rec.durations) << '\n';
  }
  if (!out) throw IoError("manifest: write failed for " + path);
}

std::string manifest_join(const std::string& manifest_path,
                          const std::string& wav_path) {
  namespace fs = std::filesystem;
  const fs::path p(wav_path);
  if (p.is_absolute()) return wav_path;
  return (fs::path(manifest_path).parent_path() / p).string();
}

}  // namespace crossvox::corpus
