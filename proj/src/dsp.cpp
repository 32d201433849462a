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

#include "crossvox/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crossvox/common.h"
#include "crossvox/fft.h"
#include "crossvox/kernels.h"

namespace crossvox::dsp {

namespace {

// Reflect padding without repeating the edge sample: x[-k] == x[k].
std::vector<double> reflect_pad(const std::vector<double>& x, int pad) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size() + 2 * static_cast<size_t>(pad));
  for (int i = -pad; i < n + pad; ++i) {
    out[static_cast<size_t>(i + pad)] = x[static_cast<size_t>(reflect_index(i, n))];
  }
  return out;
}

std::vector<double> hann_window(int win) {
  std::vector<double> w(static_cast<size_t>(win));
  for (int i = 0; i < win; ++i) {
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);
  }
  return w;
}

void check_stft_params(size_t len, int n_fft, int hop, int win) {
  if (n_fft <= 0 || hop <= 0 || win <= 0 || win > n_fft) {
    throw ParamError("stft: need 0 < win <= n_fft and hop > 0");
  }
  if (len < static_cast<size_t>(win)) {
    throw ParamError("stft: waveform shorter than one analysis window (" +
                     std::to_string(len) + " < " + std::to_string(win) + ")");
  }
}

[[gnu::noinline]] void stft_frame(const std::vector<double>& padded,
                                  const std::vector<double>& window,
                                  int n_fft, int hop, int win, int t,
                                  double* out_row) {
  const int n_bins = n_fft / 2 + 1;
  std::vector<double> buf(static_cast<size_t>(n_fft), 0.0);
  const size_t start = static_cast<size_t>(t) * hop;
  for (int i = 0; i < win; ++i) {
    buf[static_cast<size_t>(i)] = padded[start + i] * window[static_cast<size_t>(i)];
  }
  std::vector<std::complex<double>> spec = fft::rfft(buf);
  for (int k = 0; k < n_bins; ++k) out_row[k] = std::abs(spec[static_cast<size_t>(k)]);
}

std::vector<double> stft_magnitude_impl(const std::vector<double>& samples,
                                        int n_fft, int hop, int win,
                                        bool center, int* out_frames,
                                        int workers) {
  check_stft_params(samples.size(), n_fft, hop, win);
  const int pad = center ? (win - hop) / 2 : 0;
  const std::vector<double> padded = center ? reflect_pad(samples, pad) : samples;
  const int n_frames =
      1 + static_cast<int>((padded.size() - static_cast<size_t>(win)) / hop);
  const int n_bins = n_fft / 2 + 1;
  const std::vector<double> window = hann_window(win);
  std::vector<double> mags(static_cast<size_t>(n_frames) * n_bins);
  kernels::parallel_for(n_frames, workers, [&](int t) {
    stft_frame(padded, window, n_fft, hop, win, t,
               mags.data() + static_cast<size_t>(t) * n_bins);
  });
  if (out_frames != nullptr) *out_frames = n_frames;
  return mags;
}

MelSpectrogram mel_impl(const Waveform& wav, const MelConfig& cfg, int workers) {
  int n_frames = 0;
  const std::vector<double> mags = stft_magnitude_impl(
      wav.samples, cfg.n_fft, cfg.hop, cfg.win, cfg.center, &n_frames, workers);
  const int n_bins = cfg.n_fft / 2 + 1;
  const std::vector<double> fbank =
      mel_filterbank(cfg.n_fft, cfg.n_mels, wav.sample_rate);

  MelSpectrogram mel;
  mel.n_frames = n_frames;
  mel.n_mels = cfg.n_mels;
  mel.hop = cfg.hop;
  mel.n_fft = cfg.n_fft;
  mel.frames.assign(static_cast<size_t>(n_frames) * cfg.n_mels, 0.0);
  if (workers <= 1) {
    kernels::gemm_nn_serial(mags.data(), fbank.data(), mel.frames.data(),
                            n_frames, n_bins, cfg.n_mels);
  } else {
    kernels::gemm_nn(mags.data(), fbank.data(), mel.frames.data(), n_frames,
                     n_bins, cfg.n_mels);
  }
  for (double& v : mel.frames) v = std::log(std::max(v, cfg.log_floor));
  return mel;
}

struct FrameF0 {
  double f0 = 0.0;
};

[[gnu::noinline]] FrameF0 pitch_frame(const std::vector<double>& x,
                                      const PitchConfig& cfg, int sample_rate,
                                      int t) {
  const int n = static_cast<int>(x.size());
  const int tau_min = std::max(2, static_cast<int>(sample_rate / cfg.fmax));
  const int tau_max = static_cast<int>(std::ceil(sample_rate / cfg.fmin));
  const int w = cfg.corr_win;
  const int span = w + tau_max;
  // Window centered at (t + 0.5) * hop, clamped to the signal.
  int start = (t * cfg.hop + cfg.hop / 2) - span / 2;
  start = std::clamp(start, 0, std::max(0, n - span));
  if (start + span > n) return {};

  std::vector<double> seg(x.begin() + start, x.begin() + start + span);
  double mean = 0.0;
  for (double v : seg) mean += v;
  mean /= static_cast<double>(seg.size());
  for (double& v : seg) v -= mean;

  double e0 = 0.0;
  for (int i = 0; i < w; ++i) e0 += seg[static_cast<size_t>(i)] * seg[static_cast<size_t>(i)];
  if (std::sqrt(e0 / w) < cfg.silence_rms) return {};

  std::vector<double> r(static_cast<size_t>(tau_max + 1), 0.0);
  for (int tau = tau_min; tau <= tau_max; ++tau) {
    double num = 0.0;
    double e1 = 0.0;
    for (int i = 0; i < w; ++i) {
      num += seg[static_cast<size_t>(i)] * seg[static_cast<size_t>(i + tau)];
      e1 += seg[static_cast<size_t>(i + tau)] * seg[static_cast<size_t>(i + tau)];
    }
    const double den = std::sqrt(e0 * e1);
    r[static_cast<size_t>(tau)] = den > 1e-12 ? num / den : 0.0;
  }

  double r_best = -2.0;
  for (int tau = tau_min; tau <= tau_max; ++tau) {
    r_best = std::max(r_best, r[static_cast<size_t>(tau)]);
  }
  if (r_best < cfg.voicing_threshold) return {};

  // Shortest lag whose local peak is close to the global best; avoids octave
  // errors toward subharmonics.
  int tau_pick = -1;
  const double accept = std::max(cfg.voicing_threshold, 0.9 * r_best);
  for (int tau = tau_min; tau <= tau_max; ++tau) {
    const double rv = r[static_cast<size_t>(tau)];
    if (rv < accept) continue;
    const double left = tau > tau_min ? r[static_cast<size_t>(tau - 1)] : -2.0;
    const double right = tau < tau_max ? r[static_cast<size_t>(tau + 1)] : -2.0;
    if (rv >= left && rv >= right) {
      tau_pick = tau;
      break;
    }
  }
  if (tau_pick < 0) return {};

  double tau_ref = tau_pick;
  if (tau_pick > tau_min && tau_pick < tau_max) {
    const double a = r[static_cast<size_t>(tau_pick - 1)];
    const double b = r[static_cast<size_t>(tau_pick)];
    const double c = r[static_cast<size_t>(tau_pick + 1)];
    const double den = a - 2.0 * b + c;
    if (std::abs(den) > 1e-12) {
      double delta = 0.5 * (a - c) / den;
      delta = std::clamp(delta, -0.5, 0.5);
      tau_ref += delta;
    }
  }
  const double f0 = std::clamp(sample_rate / tau_ref, cfg.fmin, cfg.fmax);
  return {f0};
}

PitchTrack extract_pitch_impl(const Waveform& wav, const PitchConfig& cfg,
                              int workers) {
  if (cfg.fmin <= 0 || cfg.fmax <= cfg.fmin || cfg.hop <= 0 || cfg.corr_win <= 0) {
    throw ParamError("extract_pitch: invalid pitch search configuration");
  }
  PitchTrack track;
  track.frame_hop = cfg.hop;
  const int n_frames = static_cast<int>(wav.samples.size() / static_cast<size_t>(cfg.hop));
  track.f0.assign(static_cast<size_t>(std::max(0, n_frames)), 0.0);
  kernels::parallel_for(n_frames, workers, [&](int t) {
    track.f0[static_cast<size_t>(t)] = pitch_frame(wav.samples, cfg, wav.sample_rate, t).f0;
  });
  return track;
}

}  // namespace

int reflect_index(long long j, int n) {
  if (j < 0) j = -j;
  if (j >= n) j = 2LL * n - 2 - j;
  return static_cast<int>(std::clamp<long long>(j, 0, n - 1));
}

int mel_frame_count(size_t len, const MelConfig& cfg) {
  check_stft_params(len, cfg.n_fft, cfg.hop, cfg.win);
  if (cfg.center) {
    const size_t padded = len + static_cast<size_t>(cfg.win - cfg.hop);
    return 1 + static_cast<int>((padded - static_cast<size_t>(cfg.win)) / cfg.hop);
  }
  return 1 + static_cast<int>((len - static_cast<size_t>(cfg.win)) / cfg.hop);
}

std::vector<double> mel_filterbank(int n_fft, int n_mels, int sample_rate) {
  if (n_fft <= 0 || n_mels <= 0 || sample_rate <= 0) {
    throw ParamError("mel_filterbank: non-positive dimension");
  }
  const int n_bins = n_fft / 2 + 1;
  auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<size_t>(n_mels + 2));
  for (int m = 0; m < n_mels + 2; ++m) {
    edges[static_cast<size_t>(m)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));
  }
  std::vector<double> fbank(static_cast<size_t>(n_bins) * n_mels, 0.0);
  for (int k = 0; k < n_bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate / n_fft;
    for (int m = 0; m < n_mels; ++m) {
      const double lo = edges[static_cast<size_t>(m)];
      const double mid = edges[static_cast<size_t>(m + 1)];
      const double hi = edges[static_cast<size_t>(m + 2)];
      double w = 0.0;
      if (f > lo && f < hi) {
        w = f <= mid ? (f - lo) / std::max(mid - lo, 1e-12)
                     : (hi - f) / std::max(hi - mid, 1e-12);
      }
      fbank[static_cast<size_t>(k) * n_mels + m] = w;
    }
  }
  return fbank;
}

std::vector<double> stft_magnitude(const std::vector<double>& samples,
                                   int n_fft, int hop, int win, bool center,
                                   int* out_frames) {
  return stft_magnitude_impl(samples, n_fft, hop, win, center, out_frames,
                             kernels::threads());
}

MelSpectrogram mel_spectrogram(const Waveform& wav, const MelConfig& cfg) {
  return mel_impl(wav, cfg, kernels::threads());
}

MelSpectrogram mel_spectrogram_serial(const Waveform& wav, const MelConfig& cfg) {
  return mel_impl(wav, cfg, 1);
}

PitchTrack extract_pitch(const Waveform& wav, const PitchConfig& cfg) {
  return extract_pitch_impl(wav, cfg, kernels::threads());
}

PitchTrack extract_pitch_serial(const Waveform& wav, const PitchConfig& cfg) {
  return extract_pitch_impl(wav, cfg, 1);
}

double median_pitch(const PitchTrack& track) {
  std::vector<double> voiced;
  for (double f : track.f0) {
    if (f > 0.0) voiced.push_back(f);
  }
  if (voiced.empty()) return 0.0;
  std::sort(voiced.begin(), voiced.end());
  const size_t n = voiced.size();
  return n % 2 == 1 ? voiced[n / 2] : 0.5 * (voiced[n / 2 - 1] + voiced[n / 2]);
}

std::vector<double> frame_energy(const Waveform& wav, int hop, int win,
                                 bool center) {
  if (hop <= 0 || win <= 0) throw ParamError("frame_energy: non-positive hop or win");
  if (wav.samples.size() < static_cast<size_t>(win)) {
    throw ParamError("frame_energy: waveform shorter than one analysis window");
  }
  const int pad = center ? (win - hop) / 2 : 0;
  const std::vector<double> padded =
      center ? reflect_pad(wav.samples, pad) : wav.samples;
  const int n_frames =
      1 + static_cast<int>((padded.size() - static_cast<size_t>(win)) / hop);
  std::vector<double> rms(static_cast<size_t>(n_frames), 0.0);
  for (int t = 0; t < n_frames; ++t) {
    double acc = 0.0;
    const size_t start = static_cast<size_t>(t) * hop;
    for (int i = 0; i < win; ++i) acc += padded[start + i] * padded[start + i];
    rms[static_cast<size_t>(t)] = std::sqrt(acc / win);
  }
  return rms;
}

std::vector<double> resample_to_length(const std::vector<double>& x,
                                       size_t out_len) {
  if (x.empty()) throw ParamError("resample_to_length: empty input");
  if (out_len == 0) throw ParamError("resample_to_length: zero output length");
  const double step = static_cast<double>(x.size()) / static_cast<double>(out_len);
  const double cutoff = std::min(1.0, 1.0 / step) * 0.97;
  const int half_base = 24;
  const int half = static_cast<int>(std::ceil(half_base * std::max(1.0, step)));
  const int n = static_cast<int>(x.size());
  std::vector<double> out(out_len, 0.0);

  kernels::parallel_for(static_cast<int>(out_len), kernels::threads(), [&](int i) {
    const double pos = i * step;
    const int center = static_cast<int>(std::floor(pos));
    const double frac = pos - center;
    // Exact passthrough when the sample grid aligns (identity resampling).
    if (frac == 0.0 && step == 1.0) {
      out[static_cast<size_t>(i)] = x[static_cast<size_t>(center)];
      return;
    }
    double acc = 0.0;
    for (int k = -half + 1; k <= half; ++k) {
      const int idx = center + k;
      if (idx < 0 || idx >= n) continue;
      const double d = (static_cast<double>(k) - frac) * cutoff;
      double s;
      if (std::abs(d) < 1e-12) {
        s = 1.0;
      } else {
        s = std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
      }
      const double u = (static_cast<double>(k) - frac) / half;
      const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * std::clamp(u, -1.0, 1.0));
      acc += x[static_cast<size_t>(idx)] * s * w * cutoff;
    }
    out[static_cast<size_t>(i)] = acc;
  });
  return out;
}

}  // namespace crossvox::dsp
