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

#ifndef CROSSVOX_DSP_H_
#define CROSSVOX_DSP_H_

#include <vector>

#include "crossvox/wav.h"

namespace crossvox::dsp {

struct MelConfig {
  int n_fft = 1024;
  int hop = 256;
  int win = 1024;
  int n_mels = 80;
  double log_floor = 1e-5;
  // Reflect-pads (win - hop) / 2 samples on both sides so that frame t is
  // centered at (t + 0.5) * hop and T == floor(len / hop). With center off,
  // T == 1 + floor((len - win) / hop).
  bool center = true;
};

// Log-magnitude mel spectrogram, frames by n_mels, row-major.
struct MelSpectrogram {
  int n_frames = 0;
  int n_mels = 0;
  std::vector<double> frames;
  int hop = 0;
  int n_fft = 0;

  double at(int t, int m) const { return frames[static_cast<size_t>(t) * n_mels + m]; }
};

// Number of analysis frames for a signal of the given length.
int mel_frame_count(size_t len, const MelConfig& cfg);

// Index into a length-n signal under reflect padding (edge sample not
// repeated): j == -1 maps to 1, j == n maps to n - 2.
int reflect_index(long long j, int n);

// Triangular mel filterbank, (n_fft/2+1) x n_mels, applied to magnitude
// spectra. Mel scale 2595*log10(1 + f/700), band edges at 0..sr/2.
std::vector<double> mel_filterbank(int n_fft, int n_mels, int sample_rate);

// Magnitude STFT: returns T x (n_fft/2+1) row-major magnitudes. Shared by
// mel_spectrogram and the trainable losses so both see identical values.
std::vector<double> stft_magnitude(const std::vector<double>& samples,
                                   int n_fft, int hop, int win, bool center,
                                   int* out_frames);

MelSpectrogram mel_spectrogram(const Waveform& wav, const MelConfig& cfg);
// Serial reference; mel_spectrogram fans frames out over OpenMP.
MelSpectrogram mel_spectrogram_serial(const Waveform& wav, const MelConfig& cfg);

struct PitchConfig {
  double fmin = 60.0;
  double fmax = 500.0;
  double voicing_threshold = 0.45;
  int hop = 256;
  int corr_win = 600;
  double silence_rms = 1e-4;
};

struct PitchTrack {
  std::vector<double> f0;  // per frame, Hz; 0 = unvoiced
  int frame_hop = 0;
};

// Normalized-autocorrelation pitch per frame; frames align with the centered
// mel framing (frame t centered at (t + 0.5) * hop). Median is taken over
// voiced frames only, 0 when there are none.
PitchTrack extract_pitch(const Waveform& wav, const PitchConfig& cfg = {});
PitchTrack extract_pitch_serial(const Waveform& wav, const PitchConfig& cfg = {});
double median_pitch(const PitchTrack& track);

// Root-mean-square per window. With center, framing matches mel.
std::vector<double> frame_energy(const Waveform& wav, int hop, int win,
                                 bool center = false);

// Bandlimited windowed-sinc resampling of x to out_len samples.
std::vector<double> resample_to_length(const std::vector<double>& x, size_t out_len);

}  // namespace crossvox::dsp

#endif  // CROSSVOX_DSP_H_
