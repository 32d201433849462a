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

#ifndef CROSSVOX_FFT_H_
#define CROSSVOX_FFT_H_

#include <complex>
#include <vector>

namespace crossvox::fft {

// Real FFT of size n (power of two). Output has n/2+1 bins. Plans are cached
// per size behind a mutex; execution is reentrant, so frame loops can run
// these from OpenMP workers.
void rfft(const double* in, std::complex<double>* out, int n);

// Inverse of rfft, scaled by 1/n so irfft(rfft(x)) == x.
void irfft(const std::complex<double>* in, double* out, int n);

std::vector<std::complex<double>> rfft(const std::vector<double>& x);
std::vector<double> irfft(const std::vector<std::complex<double>>& spec, int n);

}  // namespace crossvox::fft

#endif  // CROSSVOX_FFT_H_
