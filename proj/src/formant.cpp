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

#include "crossvox/formant.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crossvox/common.h"
#include "crossvox/dsp.h"

namespace crossvox::dsp {

Waveform change_formant(const Waveform& wav, double factor,
                        double median_pitch_hz) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw ParamError("change_formant: factor " + std::to_string(factor) +
                     " outside [0.5, 2.0]");
  }
  if (wav.samples.empty()) throw ParamError("change_formant: empty waveform");
  if (median_pitch_hz < 0.0) {
    throw ParamError("change_formant: negative median pitch");
  }

  Waveform out;
  out.sample_rate = wav.sample_rate;
  if (factor == 1.0) {
    out.samples = wav.samples;
    return out;
  }

  const size_t n = wav.samples.size();
  // Resampling by 1/factor multiplies every spectral frequency by factor and
  // divides the duration by factor.
  const size_t n_res =
      std::max<size_t>(1, static_cast<size_t>(std::llround(n / factor)));
  const std::vector<double> res = resample_to_length(wav.samples, n_res);

  // Grain grid: analysis period in the resampled signal, synthesis period in
  // the output. The ratio restores both duration (n_res * factor == n) and
  // pitch (sr / p_syn == median pitch).
  const double anchor_hz = median_pitch_hz > 0.0 ? median_pitch_hz : 100.0;
  const double p_ana = wav.sample_rate / (anchor_hz * factor);
  const double p_syn = p_ana * factor;
  const int grain =
      std::max(8, 2 * static_cast<int>(std::lround(std::max(p_ana, p_syn))));
  const int half = grain / 2;

  std::vector<double> acc(n, 0.0);
  std::vector<double> wsum(n, 0.0);
  const int n_res_i = static_cast<int>(n_res);
  for (int j = 0;; ++j) {
    const int oo = static_cast<int>(std::lround(j * p_syn));
    if (oo - half >= static_cast<int>(n)) break;
    const int io = static_cast<int>(std::lround(j * p_ana));
    for (int k = -half; k < grain - half; ++k) {
      const int src = io + k;
      const int dst = oo + k;
      if (src < 0 || src >= n_res_i) continue;
      if (dst < 0 || dst >= static_cast<int>(n)) continue;
      const double w =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (k + half) /
                               std::max(1, grain - 1));
      acc[static_cast<size_t>(dst)] += w * res[static_cast<size_t>(src)];
      wsum[static_cast<size_t>(dst)] += w;
    }
  }

  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double denom = std::max(wsum[i], 1e-8);
    out.samples[i] = std::clamp(acc[i] / denom, -1.0, 1.0);
  }
  return out;
}

}  // namespace crossvox::dsp
