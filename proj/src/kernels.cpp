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

#include "crossvox/kernels.h"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>

namespace crossvox::kernels {

namespace {

int g_threads = 0;

int effective_threads() {
  return g_threads > 0 ? g_threads : omp_get_max_threads();
}

// Shared row workers. noinline keeps one code instance for both the serial
// and the OpenMP drivers, so the two variants produce bit-identical output.

[[gnu::noinline]] void gemm_nn_row(const double* a, const double* b, double* c,
                                   int k, int n, int i, bool accumulate) {
  double* crow = c + static_cast<size_t>(i) * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  const double* arow = a + static_cast<size_t>(i) * k;
  for (int l = 0; l < k; ++l) {
    const double av = arow[l];
    if (av == 0.0) continue;
    const double* brow = b + static_cast<size_t>(l) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

[[gnu::noinline]] void gemm_nt_row(const double* a, const double* b, double* c,
                                   int k, int n, int i, bool accumulate) {
  const double* arow = a + static_cast<size_t>(i) * k;
  double* crow = c + static_cast<size_t>(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* brow = b + static_cast<size_t>(j) * k;
    double acc = 0.0;
    for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
    crow[j] = accumulate ? crow[j] + acc : acc;
  }
}

[[gnu::noinline]] void gemm_tn_row(const double* a, const double* b, double* c,
                                   int m, int k, int n, int p,
                                   bool accumulate) {
  double* crow = c + static_cast<size_t>(p) * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  for (int i = 0; i < m; ++i) {
    const double av = a[static_cast<size_t>(i) * k + p];
    if (av == 0.0) continue;
    const double* brow = b + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

[[gnu::noinline]] void nearest_row(const double* points, const double* centroids,
                                   int k, int d, int i, int* assign,
                                   double* dist2) {
  const double* p = points + static_cast<size_t>(i) * d;
  int best = 0;
  double best_d2 = 0.0;
  for (int c = 0; c < k; ++c) {
    const double* cen = centroids + static_cast<size_t>(c) * d;
    double d2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = p[j] - cen[j];
      d2 += diff * diff;
    }
    if (c == 0 || d2 < best_d2) {
      best = c;
      best_d2 = d2;
    }
  }
  assign[i] = best;
  if (dist2) dist2[i] = best_d2;
}

}  // namespace

void set_threads(int n) { g_threads = n < 0 ? 0 : n; }

int threads() { return effective_threads(); }

void gemm_nn_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate) {
  for (int i = 0; i < m; ++i) gemm_nn_row(a, b, c, k, n, i, accumulate);
}

void gemm_nn_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (int i = 0; i < m; ++i) gemm_nn_row(a, b, c, k, n, i, accumulate);
}

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate) {
  // Tiny products are not worth the fork/join.
  if (static_cast<long long>(m) * k * n < 16384 || effective_threads() == 1) {
    gemm_nn_serial(a, b, c, m, k, n, accumulate);
  } else {
    gemm_nn_omp(a, b, c, m, k, n, accumulate);
  }
}

void gemm_nt_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate) {
  for (int i = 0; i < m; ++i) gemm_nt_row(a, b, c, k, n, i, accumulate);
}

void gemm_nt_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (int i = 0; i < m; ++i) gemm_nt_row(a, b, c, k, n, i, accumulate);
}

void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate) {
  if (static_cast<long long>(m) * k * n < 16384 || effective_threads() == 1) {
    gemm_nt_serial(a, b, c, m, k, n, accumulate);
  } else {
    gemm_nt_omp(a, b, c, m, k, n, accumulate);
  }
}

void gemm_tn_serial(const double* a, const double* b, double* c, int m, int k,
                    int n, bool accumulate) {
  for (int p = 0; p < k; ++p) gemm_tn_row(a, b, c, m, k, n, p, accumulate);
}

void gemm_tn_omp(const double* a, const double* b, double* c, int m, int k,
                 int n, bool accumulate) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (int p = 0; p < k; ++p) gemm_tn_row(a, b, c, m, k, n, p, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n,
             bool accumulate) {
  if (static_cast<long long>(m) * k * n < 16384 || effective_threads() == 1) {
    gemm_tn_serial(a, b, c, m, k, n, accumulate);
  } else {
    gemm_tn_omp(a, b, c, m, k, n, accumulate);
  }
}

void nearest_centroid_serial(const double* points, const double* centroids,
                             int n, int k, int d, int* assign, double* dist2) {
  for (int i = 0; i < n; ++i) nearest_row(points, centroids, k, d, i, assign, dist2);
}

void nearest_centroid_omp(const double* points, const double* centroids, int n,
                          int k, int d, int* assign, double* dist2) {
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (int i = 0; i < n; ++i) nearest_row(points, centroids, k, d, i, assign, dist2);
}

void nearest_centroid(const double* points, const double* centroids, int n,
                      int k, int d, int* assign, double* dist2) {
  if (static_cast<long long>(n) * k * d < 16384 || effective_threads() == 1) {
    nearest_centroid_serial(points, centroids, n, k, d, assign, dist2);
  } else {
    nearest_centroid_omp(points, centroids, n, k, d, assign, dist2);
  }
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::atomic_flag have_err = ATOMIC_FLAG_INIT;
#pragma omp parallel for schedule(dynamic) num_threads(std::min(workers, n))
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      if (!have_err.test_and_set()) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace crossvox::kernels
