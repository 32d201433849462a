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
// Serial kernels against a naive triple-loop oracle, OpenMP variants against
// the serial reference, and parallel_for semantics.

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "crossvox/common.h"
#include "crossvox/kernels.h"
#include "doctest.h"

using namespace crossvox;

namespace {

std::vector<double> rand_vec(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

// Naive oracle: C[m x n] = op_a(A) * op_b(B), all row-major.
std::vector<double> naive_gemm(const std::vector<double>& a,
                               const std::vector<double>& b, int m, int k,
                               int n, char mode) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        double av = 0.0, bv = 0.0;
        if (mode == 'n') {  // A[m x k] * B[k x n]
          av = a[static_cast<size_t>(i) * k + l];
          bv = b[static_cast<size_t>(l) * n + j];
        } else if (mode == 't') {  // A[m x k] * B[n x k]^T
          av = a[static_cast<size_t>(i) * k + l];
          bv = b[static_cast<size_t>(j) * k + l];
        } else {  // 'T': A[k x m]^T * B[k x n], caller passes (m,k,n) of result
          av = a[static_cast<size_t>(l) * m + i];
          bv = b[static_cast<size_t>(l) * n + j];
        }
        acc += av * bv;
      }
      c[static_cast<size_t>(i) * n + j] = acc;
    }
  }
  return c;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("gemm_nn matches the naive oracle, serial and omp") {
  const int m = 17, k = 23, n = 11;
  const auto a = rand_vec(static_cast<size_t>(m) * k, 1);
  const auto b = rand_vec(static_cast<size_t>(k) * n, 2);
  const auto want = naive_gemm(a, b, m, k, n, 'n');
  std::vector<double> c(static_cast<size_t>(m) * n, -1.0);
  kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n);
  CHECK(max_abs_diff(c, want) < 1e-12);
  kernels::set_threads(3);
  std::vector<double> cp(static_cast<size_t>(m) * n, -1.0);
  kernels::gemm_nn_omp(a.data(), b.data(), cp.data(), m, k, n);
  CHECK(max_abs_diff(cp, want) < 1e-12);
  kernels::set_threads(1);
}

TEST_CASE("gemm_nt matches the naive oracle") {
  const int m = 9, k = 14, n = 21;
  const auto a = rand_vec(static_cast<size_t>(m) * k, 3);
  const auto b = rand_vec(static_cast<size_t>(n) * k, 4);
  const auto want = naive_gemm(a, b, m, k, n, 't');
  std::vector<double> c(static_cast<size_t>(m) * n);
  kernels::gemm_nt_serial(a.data(), b.data(), c.data(), m, k, n);
  CHECK(max_abs_diff(c, want) < 1e-12);
  kernels::set_threads(4);
  std::vector<double> cp(static_cast<size_t>(m) * n);
  kernels::gemm_nt_omp(a.data(), b.data(), cp.data(), m, k, n);
  CHECK(max_abs_diff(cp, want) < 1e-12);
  kernels::set_threads(1);
}

TEST_CASE("gemm_tn matches the naive oracle") {
  // C[k x n] = A[m x k]^T * B[m x n]; oracle computes A'[k x m]^T form.
  const int m = 13, k = 7, n = 10;
  const auto a = rand_vec(static_cast<size_t>(m) * k, 5);
  const auto b = rand_vec(static_cast<size_t>(m) * n, 6);
  // Oracle 'T' mode expects A stored [l x m_out]; here rows l = m, cols = k.
  const auto want = naive_gemm(a, b, k, m, n, 'T');
  std::vector<double> c(static_cast<size_t>(k) * n);
  kernels::gemm_tn_serial(a.data(), b.data(), c.data(), m, k, n);
  CHECK(max_abs_diff(c, want) < 1e-12);
  kernels::set_threads(2);
  std::vector<double> cp(static_cast<size_t>(k) * n);
  kernels::gemm_tn_omp(a.data(), b.data(), cp.data(), m, k, n);
  CHECK(max_abs_diff(cp, want) < 1e-12);
  kernels::set_threads(1);
}

TEST_CASE("gemm accumulate adds into the output") {
  const int m = 4, k = 3, n = 5;
  const auto a = rand_vec(static_cast<size_t>(m) * k, 7);
  const auto b = rand_vec(static_cast<size_t>(k) * n, 8);
  const auto base = naive_gemm(a, b, m, k, n, 'n');
  std::vector<double> c(static_cast<size_t>(m) * n, 1.5);
  kernels::gemm_nn_serial(a.data(), b.data(), c.data(), m, k, n, true);
  std::vector<double> want(base);
  for (double& v : want) v += 1.5;
  CHECK(max_abs_diff(c, want) < 1e-12);
}

TEST_CASE("auto-dispatch gemm equals serial for any thread setting") {
  const int m = 40, k = 40, n = 40;
  const auto a = rand_vec(static_cast<size_t>(m) * k, 9);
  const auto b = rand_vec(static_cast<size_t>(k) * n, 10);
  std::vector<double> cs(static_cast<size_t>(m) * n);
  kernels::gemm_nn_serial(a.data(), b.data(), cs.data(), m, k, n);
  for (int t : {1, 2, 5}) {
    kernels::set_threads(t);
    std::vector<double> c(static_cast<size_t>(m) * n);
    kernels::gemm_nn(a.data(), b.data(), c.data(), m, k, n);
    CHECK(max_abs_diff(c, cs) < 1e-12);
  }
  kernels::set_threads(1);
}

TEST_CASE("nearest_centroid picks the closest row with ties to lowest index") {
  const int n = 50, k = 6, d = 8;
  const auto pts = rand_vec(static_cast<size_t>(n) * d, 11);
  const auto cents = rand_vec(static_cast<size_t>(k) * d, 12);
  std::vector<int> assign(n);
  std::vector<double> dist2(n);
  kernels::nearest_centroid_serial(pts.data(), cents.data(), n, k, d,
                                   assign.data(), dist2.data());
  for (int i = 0; i < n; ++i) {
    double best = 1e300;
    int best_c = -1;
    for (int c = 0; c < k; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = pts[static_cast<size_t>(i) * d + j] -
                            cents[static_cast<size_t>(c) * d + j];
        acc += diff * diff;
      }
      if (acc < best) {
        best = acc;
        best_c = c;
      }
    }
    CHECK(assign[static_cast<size_t>(i)] == best_c);
    CHECK(dist2[static_cast<size_t>(i)] == doctest::Approx(best).epsilon(1e-10));
  }
  // Exact tie: duplicate centroid rows; lowest index must win.
  std::vector<double> dup_cents(cents);
  for (int j = 0; j < d; ++j)
    dup_cents[static_cast<size_t>(3) * d + j] = dup_cents[static_cast<size_t>(1) * d + j];
  std::vector<int> assign2(n);
  kernels::nearest_centroid_serial(pts.data(), dup_cents.data(), n, k, d,
                                   assign2.data(), dist2.data());
  for (int i = 0; i < n; ++i) CHECK(assign2[static_cast<size_t>(i)] != 3);

  kernels::set_threads(3);
  std::vector<int> assign_p(n);
  std::vector<double> dist2_p(n);
  kernels::nearest_centroid_omp(pts.data(), cents.data(), n, k, d,
                                assign_p.data(), dist2_p.data());
  CHECK(assign_p == assign);
  kernels::set_threads(1);
}

TEST_CASE("parallel_for visits every index exactly once") {
  for (int workers : {1, 4}) {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h = 0;
    kernels::parallel_for(257, workers, [&](int i) { hits[static_cast<size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for propagates worker exceptions") {
  CHECK_THROWS_AS(
      kernels::parallel_for(64, 4,
                            [](int i) {
                              if (i == 13) throw std::runtime_error("boom");
                            }),
      std::runtime_error);
}

TEST_CASE("set_threads clamps to at least one") {
  kernels::set_threads(0);
  CHECK(kernels::threads() >= 1);
  kernels::set_threads(1);
  CHECK(kernels::threads() == 1);
}
