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
// Micro-benchmark comparing the serial reference kernels against the
// OpenMP variants, plus a mel-spectrogram end-to-end timing. Also checks
// that both variants agree to near machine precision on every shape.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "crossvox/common.h"
#include "crossvox/dsp.h"
#include "crossvox/kernels.h"
#include "crossvox/wav.h"

using namespace crossvox;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Repeats fn until ~0.2 s elapsed and reports seconds per call.
double time_call(const std::function<void()>& fn) {
  fn();  // warm up
  int reps = 0;
  const double t0 = now_s();
  double elapsed = 0.0;
  do {
    fn();
    ++reps;
    elapsed = now_s() - t0;
  } while (elapsed < 0.2);
  return elapsed / reps;
}

void bench_gemm(int m, int k, int n, Rng& rng) {
  const std::vector<double> a = random_vec(static_cast<size_t>(m) * k, rng);
  const std::vector<double> b = random_vec(static_cast<size_t>(k) * n, rng);
  std::vector<double> c_serial(static_cast<size_t>(m) * n, 0.0);
  std::vector<double> c_omp(static_cast<size_t>(m) * n, 0.0);

  const double ts = time_call([&] {
    kernels::gemm_nn_serial(a.data(), b.data(), c_serial.data(), m, k, n);
  });
  const double tp = time_call([&] {
    kernels::gemm_nn_omp(a.data(), b.data(), c_omp.data(), m, k, n);
  });
  const double diff = max_abs_diff(c_serial, c_omp);
  const double gflops = 2.0 * m * k * n / 1e9;
  std::printf(
      "gemm_nn %4dx%4dx%4d  serial %8.3f ms (%6.2f GF/s)  omp %8.3f ms "
      "(%6.2f GF/s)  speedup %5.2fx  max|diff| %.2e\n",
      m, k, n, ts * 1e3, gflops / ts, tp * 1e3, gflops / tp, ts / tp, diff);
  if (diff > 1e-9) {
    std::fprintf(stderr, "serial/omp mismatch on gemm %dx%dx%d\n", m, k, n);
    std::exit(1);
  }
}

void bench_nearest(int n, int k, int d, Rng& rng) {
  const std::vector<double> points = random_vec(static_cast<size_t>(n) * d, rng);
  const std::vector<double> cents = random_vec(static_cast<size_t>(k) * d, rng);
  std::vector<int> as(n), ap(n);
  std::vector<double> ds(n), dp(n);

  const double ts = time_call([&] {
    kernels::nearest_centroid_serial(points.data(), cents.data(), n, k, d,
                                     as.data(), ds.data());
  });
  const double tp = time_call([&] {
    kernels::nearest_centroid_omp(points.data(), cents.data(), n, k, d,
                                  ap.data(), dp.data());
  });
  int mismatches = 0;
  for (int i = 0; i < n; ++i)
    if (as[i] != ap[i]) ++mismatches;
  std::printf(
      "nearest  n=%5d k=%3d d=%3d  serial %8.3f ms  omp %8.3f ms  "
      "speedup %5.2fx  assign mismatches %d\n",
      n, k, d, ts * 1e3, tp * 1e3, ts / tp, mismatches);
  if (mismatches != 0) {
    std::fprintf(stderr, "serial/omp assignment mismatch\n");
    std::exit(1);
  }
}

void bench_mel(double seconds, Rng& rng) {
  Waveform wav;
  wav.sample_rate = 16000;
  wav.samples = random_vec(static_cast<size_t>(seconds * 16000), rng);
  dsp::MelConfig cfg;
  const double ts = time_call([&] { dsp::mel_spectrogram_serial(wav, cfg); });
  const double tp = time_call([&] { dsp::mel_spectrogram(wav, cfg); });
  std::printf(
      "mel      %.1f s audio          serial %8.3f ms  omp %8.3f ms  "
      "speedup %5.2fx\n",
      seconds, ts * 1e3, tp * 1e3, ts / tp);
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;  // 0 = library default
  if (argc > 1) threads = std::atoi(argv[1]);
  if (threads > 0) kernels::set_threads(threads);
  std::printf("threads: %d\n", kernels::threads());

  Rng rng(20260815);
  bench_gemm(64, 64, 64, rng);
  bench_gemm(256, 256, 256, rng);
  bench_gemm(512, 128, 512, rng);
  bench_nearest(4096, 64, 80, rng);
  bench_nearest(16384, 64, 80, rng);
  bench_mel(2.0, rng);
  bench_mel(8.0, rng);
  std::printf("kernel benchmark complete\n");
  return 0;
}
