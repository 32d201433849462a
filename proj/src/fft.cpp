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

#include "crossvox/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "crossvox/common.h"

namespace crossvox::fft {

namespace {

// Plans created with FFTW_UNALIGNED work on arbitrary caller buffers, and
// fftw_execute_dft_* is thread-safe, so only plan creation needs the lock.
std::mutex g_plan_mutex;
std::map<int, fftw_plan> g_fwd_plans;
std::map<int, fftw_plan> g_inv_plans;

fftw_plan forward_plan(int n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_fwd_plans.find(n);
  if (it != g_fwd_plans.end()) return it->second;
  std::vector<double> in(n);
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(), out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  g_fwd_plans[n] = p;
  return p;
}

fftw_plan inverse_plan(int n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_inv_plans.find(n);
  if (it != g_inv_plans.end()) return it->second;
  std::vector<fftw_complex> in(n / 2 + 1);
  std::vector<double> out(n);
  fftw_plan p = fftw_plan_dft_c2r_1d(n, in.data(), out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  g_inv_plans[n] = p;
  return p;
}

}  // namespace

void rfft(const double* in, std::complex<double>* out, int n) {
  if (n <= 0 || (n & (n - 1)) != 0) throw ParamError("rfft: size must be a power of two");
  fftw_plan p = forward_plan(n);
  // FFTW destroys r2c input; copy so callers keep theirs.
  std::vector<double> tmp(in, in + n);
  fftw_execute_dft_r2c(p, tmp.data(), reinterpret_cast<fftw_complex*>(out));
}

void irfft(const std::complex<double>* in, double* out, int n) {
  if (n <= 0 || (n & (n - 1)) != 0) throw ParamError("irfft: size must be a power of two");
  fftw_plan p = inverse_plan(n);
  std::vector<std::complex<double>> tmp(in, in + n / 2 + 1);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(tmp.data()), out);
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] *= scale;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  rfft(x.data(), out.data(), static_cast<int>(x.size()));
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spec, int n) {
  std::vector<double> out(n);
  irfft(spec.data(), out.data(), n);
  return out;
}

}  // namespace crossvox::fft
