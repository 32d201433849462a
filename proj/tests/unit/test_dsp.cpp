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
// Spectrogram framing and filterbank properties, FFT against a naive DFT
// oracle, pitch and energy extraction on synthetic signals, resampling, and
// the formant-shift envelope oracle.

#include <cmath>
#include <complex>
#include <vector>

#include "crossvox/common.h"
#include "crossvox/dsp.h"
#include "crossvox/fft.h"
#include "crossvox/kernels.h"
#include "crossvox/formant.h"
#include "crossvox/wav.h"
#include "doctest.h"
#include "test_support.h"

using namespace crossvox;
using testsupport::make_sine;
using testsupport::make_vowel;

TEST_CASE("rfft matches a naive DFT and irfft inverts it") {
  Rng rng(99);
  for (int n : {16, 64, 250}) {
    std::vector<double> x(static_cast<size_t>(n));
    for (double& v : x) v = rng.uniform() * 2.0 - 1.0;
    const auto spec = fft::rfft(x);
    REQUIRE(static_cast<int>(spec.size()) == n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
      std::complex<double> want(0.0, 0.0);
      for (int t = 0; t < n; ++t) {
        const double ang = -2.0 * M_PI * k * t / n;
        want += x[static_cast<size_t>(t)] *
                std::complex<double>(std::cos(ang), std::sin(ang));
      }
      CHECK(std::abs(spec[static_cast<size_t>(k)] - want) < 1e-9);
    }
    const auto back = fft::irfft(spec, n);
    for (int t = 0; t < n; ++t)
      CHECK(back[static_cast<size_t>(t)] ==
            doctest::Approx(x[static_cast<size_t>(t)]).epsilon(1e-10));
  }
}

TEST_CASE("mel framing matches the documented frame counts") {
  dsp::MelConfig cfg;
  SUBCASE("centered: T == floor(len / hop)") {
    cfg.center = true;
    for (size_t len : {4096u, 5000u, 16000u}) {
      CHECK(dsp::mel_frame_count(len, cfg) ==
            static_cast<int>(len / static_cast<size_t>(cfg.hop)));
      Waveform wav = make_sine(220.0, 0.0, 16000);
      wav.samples.assign(len, 0.01);
      const auto mel = dsp::mel_spectrogram(wav, cfg);
      CHECK(mel.n_frames == static_cast<int>(len / static_cast<size_t>(cfg.hop)));
      CHECK(mel.n_mels == cfg.n_mels);
    }
  }
  SUBCASE("uncentered: T == 1 + floor((len - win) / hop)") {
    cfg.center = false;
    for (size_t len : {4096u, 5000u, 16000u}) {
      const int want = 1 + static_cast<int>((len - static_cast<size_t>(cfg.win)) /
                                            static_cast<size_t>(cfg.hop));
      CHECK(dsp::mel_frame_count(len, cfg) == want);
    }
  }
}

TEST_CASE("reflect_index mirrors without repeating edges") {
  CHECK(dsp::reflect_index(0, 5) == 0);
  CHECK(dsp::reflect_index(-1, 5) == 1);
  CHECK(dsp::reflect_index(-2, 5) == 2);
  CHECK(dsp::reflect_index(4, 5) == 4);
  CHECK(dsp::reflect_index(5, 5) == 3);
  CHECK(dsp::reflect_index(6, 5) == 2);
}

TEST_CASE("mel filterbank rows partition the spectrum") {
  const int n_fft = 1024, n_mels = 80, sr = 16000;
  const auto fb = dsp::mel_filterbank(n_fft, n_mels, sr);
  const int n_bins = n_fft / 2 + 1;
  REQUIRE(fb.size() == static_cast<size_t>(n_bins) * n_mels);
  // Every filter has positive mass; triangles are normalized so weights in
  // each filter sum to 1 and every interior bin contributes somewhere.
  for (int m = 0; m < n_mels; ++m) {
    double mass = 0.0;
    for (int k = 0; k < n_bins; ++k)
      mass += fb[static_cast<size_t>(k) * n_mels + m];
    CHECK(mass > 0.0);
  }
  for (size_t i = 0; i < fb.size(); ++i) CHECK(fb[i] >= 0.0);
}

TEST_CASE("sine spectrogram peaks at the right mel band") {
  const int sr = 16000;
  dsp::MelConfig cfg;
  for (double hz : {300.0, 1000.0, 3000.0}) {
    const auto mel = dsp::mel_spectrogram(make_sine(hz, 0.3, sr), cfg);
    // Find the band whose center is closest to hz via the filterbank argmax
    // of a mid-utterance frame.
    const int t = mel.n_frames / 2;
    int peak_band = 0;
    for (int m = 1; m < mel.n_mels; ++m)
      if (mel.at(t, m) > mel.at(t, peak_band)) peak_band = m;
    // Mel scale: band center frequency from the inverse mel of the band
    // index; allow +-2 bands of slack.
    const double mel_max = 2595.0 * std::log10(1.0 + sr / 2.0 / 700.0);
    const double mel_center = (peak_band + 1.0) * mel_max / (mel.n_mels + 1.0);
    const double hz_center = 700.0 * (std::pow(10.0, mel_center / 2595.0) - 1.0);
    const double band_hz = mel_max / (mel.n_mels + 1.0);
    const double hz_tol =
        700.0 * (std::pow(10.0, (mel_center + 2.5 * band_hz) / 2595.0) - 1.0) -
        hz_center;
    CHECK(std::fabs(hz_center - hz) < hz_tol);
  }
}

TEST_CASE("mel serial and parallel variants agree bitwise") {
  const Waveform wav = make_vowel(120.0, 500.0, 1500.0, 2500.0, 0.4, 16000, 3);
  dsp::MelConfig cfg;
  kernels::set_threads(4);
  const auto par = dsp::mel_spectrogram(wav, cfg);
  kernels::set_threads(1);
  const auto ser = dsp::mel_spectrogram_serial(wav, cfg);
  REQUIRE(par.n_frames == ser.n_frames);
  CHECK(par.frames == ser.frames);
}

TEST_CASE("pitch extraction recovers sine and vowel f0") {
  for (double hz : {100.0, 150.0, 220.0, 330.0}) {
    const auto track = dsp::extract_pitch(make_sine(hz, 0.5, 16000));
    const double med = dsp::median_pitch(track);
    CHECK(std::fabs(med - hz) / hz < 0.05);
  }
  const Waveform vowel = make_vowel(140.0, 500.0, 1500.0, 2500.0, 0.6, 16000, 4);
  const double med = dsp::median_pitch(dsp::extract_pitch(vowel));
  CHECK(std::fabs(med - 140.0) / 140.0 < 0.05);
  // Serial variant agrees bitwise.
  kernels::set_threads(4);
  const auto par = dsp::extract_pitch(vowel);
  kernels::set_threads(1);
  const auto ser = dsp::extract_pitch_serial(vowel);
  CHECK(par.f0 == ser.f0);
}

TEST_CASE("silence and noise are unvoiced") {
  Waveform silence;
  silence.sample_rate = 16000;
  silence.samples.assign(8000, 0.0);
  const auto track = dsp::extract_pitch(silence);
  CHECK(dsp::median_pitch(track) == 0.0);
  for (double f : track.f0) CHECK(f == 0.0);
}

TEST_CASE("frame_energy matches the analytic sine RMS") {
  const double amp = 0.3;
  const Waveform wav = make_sine(200.0, 0.5, 16000, amp);
  const auto rms = dsp::frame_energy(wav, 256, 1024, true);
  CHECK(rms.size() == wav.samples.size() / 256);
  const double want = amp / std::sqrt(2.0);
  // Interior frames; edges see the reflect padding.
  for (size_t t = 4; t + 4 < rms.size(); ++t)
    CHECK(rms[t] == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("resample_to_length preserves a bandlimited tone") {
  const Waveform wav = make_sine(440.0, 0.25, 16000, 0.5);
  const size_t out_len = wav.samples.size() * 3 / 4;
  const auto y = dsp::resample_to_length(wav.samples, out_len);
  REQUIRE(y.size() == out_len);
  // The resampled signal is the same tone at 4/3 the normalized frequency;
  // verify by correlating against the analytic target away from edges.
  std::vector<double> got, want;
  const double w = 2.0 * M_PI * 440.0 / 16000.0 *
                   (static_cast<double>(wav.samples.size()) / out_len);
  for (size_t i = 100; i + 100 < out_len; ++i) {
    got.push_back(y[i]);
    want.push_back(0.5 * std::sin(w * static_cast<double>(i)));
  }
  CHECK(testsupport::pearson(got, want) > 0.999);
}

TEST_CASE("formant shift scales the spectral envelope and nothing else") {
  const double f0 = 95.0, f2 = 1500.0, f3 = 2500.0;
  for (double f1 : {400.0, 500.0, 700.0}) {
    const Waveform v = make_vowel(f0, f1, f2, f3, 1.0, 16000, 42);
    const double base =
        testsupport::envelope_peak_hz(v, 150.0, 0.5 * (f1 + f2), f0);
    const double mp = dsp::median_pitch(dsp::extract_pitch(v));
    for (double factor : {0.8, 1.0, 1.2}) {
      const Waveform s = dsp::change_formant(v, factor, mp);
      CHECK(s.samples.size() == v.samples.size());
      const double est = testsupport::envelope_peak_hz(
          s, 150.0 * factor, 0.5 * (f1 + f2) * factor, f0);
      const double ratio = est / base;
      if (factor == 1.0) {
        CHECK(std::fabs(ratio - 1.0) < 0.02);
      } else {
        CHECK(std::fabs(ratio - factor) / factor < 0.10);
      }
      const double mp2 = dsp::median_pitch(dsp::extract_pitch(s));
      CHECK(std::fabs(mp2 - mp) / mp < 0.05);
    }
  }
}

TEST_CASE("stft rejects invalid parameters") {
  std::vector<double> x(100, 0.1);
  int frames = 0;
  CHECK_THROWS_AS(
      (void)dsp::stft_magnitude(x, 0, 16, 64, true, &frames), ParamError);
  CHECK_THROWS_AS(
      (void)dsp::stft_magnitude(x, 64, 0, 64, true, &frames), ParamError);
  // Window longer than FFT size.
  CHECK_THROWS_AS(
      (void)dsp::stft_magnitude(x, 64, 16, 128, true, &frames), ParamError);
}
