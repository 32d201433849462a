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

#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>
#include <unistd.h>

#include "crossvox/common.h"
#include "crossvox/corpus.h"
#include "crossvox/fft.h"
#include "crossvox/nn/layers.h"

namespace crossvox::testsupport {

Waveform make_vowel(double f0_hz, double f1_hz, double f2_hz, double f3_hz,
                    double seconds, int sample_rate, uint64_t seed) {
  corpus::SpeakerProfile sp;
  sp.f1 = f1_hz;
  sp.f2 = f2_hz;
  sp.f3 = f3_hz;
  sp.base_pitch = f0_hz;
  corpus::EmotionProfile em;  // flat contour, unit gains
  corpus::RenderConfig rc;
  rc.sample_rate = sample_rate;
  corpus::UtteranceSpec spec;
  spec.phonemes = {0};
  const int frames =
      std::max(1, static_cast<int>(seconds * sample_rate / rc.hop));
  spec.durations = {frames};
  return corpus::render_utterance(spec, sp, em, rc, seed).wav;
}

Waveform make_sine(double freq_hz, double seconds, int sample_rate,
                   double amplitude) {
  Waveform wav;
  wav.sample_rate = sample_rate;
  const size_t n = static_cast<size_t>(seconds * sample_rate);
  wav.samples.resize(n);
  const double w = 2.0 * M_PI * freq_hz / sample_rate;
  for (size_t i = 0; i < n; ++i)
    wav.samples[i] = amplitude * std::sin(w * static_cast<double>(i));
  return wav;
}

double envelope_peak_hz(const Waveform& wav, double lo_hz, double hi_hz,
                        double f0_hint_hz) {
  const int n_fft = 4096;
  const size_t n = wav.samples.size();
  if (n < static_cast<size_t>(n_fft))
    throw std::runtime_error("envelope_peak_hz: clip too short");
  // Middle segment avoids the onset/offset fades.
  const size_t start = (n - static_cast<size_t>(n_fft)) / 2;
  std::vector<double> seg(n_fft);
  for (int i = 0; i < n_fft; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * M_PI * i / (n_fft - 1));  // Hann
    seg[static_cast<size_t>(i)] = wav.samples[start + static_cast<size_t>(i)] * w;
  }
  std::vector<std::complex<double>> spec = fft::rfft(seg);
  // Real cepstrum of the log magnitude; mirror to a full spectrum first.
  std::vector<std::complex<double>> logmag(spec.size());
  for (size_t k = 0; k < spec.size(); ++k)
    logmag[k] = std::log(std::abs(spec[k]) + 1e-12);
  std::vector<double> ceps = fft::irfft(logmag, n_fft);
  // Lifter: keep quefrencies comfortably below one pitch period so harmonic
  // structure is removed but formant resonances survive.
  const int cutoff = std::max(
      8, static_cast<int>(0.7 * wav.sample_rate / std::max(50.0, f0_hint_hz)));
  std::vector<double> liftered(static_cast<size_t>(n_fft), 0.0);
  liftered[0] = ceps[0];
  for (int q = 1; q < cutoff; ++q) {
    liftered[static_cast<size_t>(q)] = ceps[static_cast<size_t>(q)];
    liftered[static_cast<size_t>(n_fft - q)] = ceps[static_cast<size_t>(n_fft - q)];
  }
  std::vector<std::complex<double>> env = fft::rfft(liftered);
  const double bin_hz = static_cast<double>(wav.sample_rate) / n_fft;
  int lo = std::max(1, static_cast<int>(lo_hz / bin_hz));
  int hi = std::min(static_cast<int>(env.size()) - 1,
                    static_cast<int>(hi_hz / bin_hz));
  if (lo >= hi) throw std::runtime_error("envelope_peak_hz: bad search band");
  int best = lo;
  for (int k = lo; k <= hi; ++k)
    if (env[static_cast<size_t>(k)].real() > env[static_cast<size_t>(best)].real())
      best = k;
  // Parabolic refinement around the winning bin.
  double peak = best * bin_hz;
  if (best > lo && best < hi) {
    const double ym = env[static_cast<size_t>(best - 1)].real();
    const double y0 = env[static_cast<size_t>(best)].real();
    const double yp = env[static_cast<size_t>(best + 1)].real();
    const double denom = ym - 2.0 * y0 + yp;
    if (std::fabs(denom) > 1e-12)
      peak = (best + 0.5 * (ym - yp) / denom) * bin_hz;
  }
  return peak;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::runtime_error("pearson: size mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da < 1e-18 || db < 1e-18) return 0.0;
  return num / std::sqrt(da * db);
}

double central_diff(const std::function<double(double)>& f, double x,
                    double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

GradCheckResult gradcheck(
    nn::ParamRegistry& reg,
    const std::function<nn::NodeP(nn::Graph&)>& build_loss, int max_checks,
    uint64_t seed, double h) {
  // Analytic gradients from one backward pass.
  reg.zero_grad();
  std::vector<nn::Mat> analytic;
  {
    nn::Graph g;
    nn::NodeP loss = build_loss(g);
    g.backward(loss);
    for (const auto& p : reg.params()) analytic.push_back(p->grad());
  }
  // Sample (param, element) pairs without replacement bias concerns: draw
  // uniformly; duplicates just re-check the same element.
  std::vector<size_t> sizes;
  size_t total = 0;
  for (const auto& p : reg.params()) {
    sizes.push_back(p->value().v.size());
    total += p->value().v.size();
  }
  if (total == 0) return {};

  Rng rng(seed);
  GradCheckResult res;
  for (int c = 0; c < max_checks; ++c) {
    size_t flat = static_cast<size_t>(
        rng.randint(0, static_cast<int>(total) - 1));
    size_t pi = 0;
    while (flat >= sizes[pi]) {
      flat -= sizes[pi];
      ++pi;
    }
    nn::Param& param = *reg.params()[pi];
    double& slot = param.value().v[flat];
    const double orig = slot;

    slot = orig + h;
    double f_plus = 0.0;
    {
      nn::Graph g;
      f_plus = build_loss(g)->val.v.at(0);
    }
    slot = orig - h;
    double f_minus = 0.0;
    {
      nn::Graph g;
      f_minus = build_loss(g)->val.v.at(0);
    }
    slot = orig;

    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double an = analytic[pi].v[flat];
    const double rel =
        std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
    res.max_rel_err = std::max(res.max_rel_err, rel);
    ++res.checks;
  }
  return res;
}

TempDir::TempDir(const std::string& tag) {
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::filesystem::path candidate =
        base / ("crossvox_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(attempt));
    std::error_code ec;
    if (std::filesystem::create_directory(candidate, ec)) {
      path_ = candidate.string();
      return;
    }
  }
  throw std::runtime_error("TempDir: cannot create scratch directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace crossvox::testsupport
