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
// Dense kernels used by the model and DSP code. Every kernel comes in a
// serial reference variant and an OpenMP variant; both call the same
// per-output-row worker, so results are bit-identical for any thread count
// (each output element is reduced serially by exactly one thread).

#ifndef CROSSVOX_KERNELS_H_
#define CROSSVOX_KERNELS_H_

#include <cstddef>
#include <functional>

namespace crossvox::kernels {

// Thread count used by the OpenMP variants. 0 means "use OpenMP's default".
void set_threads(int n);
int threads();

// C[m x n] = A[m x k] * B[k x n], row-major. accumulate adds into C.
void gemm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate = false);
void gemm_nn_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate = false);
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate = false);

// C[m x n] = A[m x k] * B[n x k]^T
void gemm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate = false);
void gemm_nt_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate = false);
void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate = false);

// C[k x n] = A[m x k]^T * B[m x n]
void gemm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate = false);
void gemm_tn_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate = false);
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate = false);

// Nearest row of centroids[k x d] for each row of points[n x d], squared
// Euclidean distance, ties broken by lowest centroid index.
void nearest_centroid_serial(const double* points, const double* centroids,
                             int n, int k, int d, int* assign, double* dist2);
void nearest_centroid_omp(const double* points, const double* centroids,
                          int n, int k, int d, int* assign, double* dist2);
void nearest_centroid(const double* points, const double* centroids, int n,
                      int k, int d, int* assign, double* dist2);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Iterations must be
// independent; used for per-utterance and per-frame fan-out.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace crossvox::kernels

#endif  // CROSSVOX_KERNELS_H_
