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
// Shared helpers for the test binaries: synthetic signal generators, a
// cepstral spectral-envelope oracle, finite-difference gradient checking,
// and scratch-directory management.

#ifndef CROSSVOX_TESTS_SUPPORT_TEST_SUPPORT_H_
#define CROSSVOX_TESTS_SUPPORT_TEST_SUPPORT_H_

#include <functional>
#include <string>
#include <vector>

#include "crossvox/nn/autograd.h"
#include "crossvox/nn/layers.h"
#include "crossvox/wav.h"

namespace crossvox::testsupport {

// Steady synthetic vowel with known formants, rendered through the same
// source-filter model as the corpus generator.
Waveform make_vowel(double f0_hz, double f1_hz, double f2_hz, double f3_hz,
                    double seconds, int sample_rate, uint64_t seed);

// Pure sine, unit amplitude unless scaled.
Waveform make_sine(double freq_hz, double seconds, int sample_rate,
                   double amplitude = 0.5);

// Spectral-envelope peak location via real-cepstrum liftering: log-magnitude
// spectrum smoothed by keeping quefrencies below the pitch period, then the
// argmax over [lo_hz, hi_hz]. Independent of the code under test.
double envelope_peak_hz(const Waveform& wav, double lo_hz, double hi_hz,
                        double f0_hint_hz);

// Pearson correlation; 0 when either side is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Central-difference derivative of f at x with step h.
double central_diff(const std::function<double(double)>& f, double x, double h);

// Checks d(loss)/d(param element) against central differences for up to
// max_checks elements sampled from every parameter of reg, calling build()
// to produce a fresh loss node each evaluation. Returns the max relative
// error, where rel = |analytic - fd| / max(1, |analytic|, |fd|).
struct GradCheckResult {
  double max_rel_err = 0.0;
  int checks = 0;
};
GradCheckResult gradcheck(
    nn::ParamRegistry& reg,
    const std::function<nn::NodeP(nn::Graph&)>& build_loss, int max_checks,
    uint64_t seed, double h = 1e-5);

// Unique scratch directory under the system temp root; removed on
// destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& leaf) const { return path_ + "/" + leaf; }

 private:
  std::string path_;
};

}  // namespace crossvox::testsupport

#endif  // CROSSVOX_TESTS_SUPPORT_TEST_SUPPORT_H_
