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

#include "crossvox/codebook.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossvox/checkpoint.h"
#include "crossvox/common.h"
#include "crossvox/kernels.h"

namespace crossvox::codebook {

namespace {

// Squared distances via ||x||^2 - 2 x.c + ||c||^2 with the cross term as one
// GEMM; assignment per row is serial so results match for any thread count.
void squared_distances(const nn::Mat& feats, const nn::Mat& centroids,
                       nn::Mat& out) {
  const int n = feats.rows, d = feats.cols, k = centroids.rows;
  out = nn::Mat(n, k);
  kernels::gemm_nt(feats.v.data(), centroids.v.data(), out.v.data(), n, d, k);
  std::vector<double> cnorm(static_cast<size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) {
      cnorm[static_cast<size_t>(c)] += centroids.at(c, j) * centroids.at(c, j);
    }
  }
  for (int i = 0; i < n; ++i) {
    double xnorm = 0.0;
    for (int j = 0; j < d; ++j) xnorm += feats.at(i, j) * feats.at(i, j);
    for (int c = 0; c < k; ++c) {
      out.at(i, c) = std::max(0.0, xnorm - 2.0 * out.at(i, c) + cnorm[static_cast<size_t>(c)]);
    }
  }
}

double exact_sq_dist(const nn::Mat& feats, int i, const nn::Mat& centroids, int c) {
  double acc = 0.0;
  for (int j = 0; j < feats.cols; ++j) {
    const double d = feats.at(i, j) - centroids.at(c, j);
    acc += d * d;
  }
  return acc;
}

struct RunResult {
  nn::Mat centroids;
  std::vector<int> assign;
  double inertia = std::numeric_limits<double>::infinity();
};

RunResult run_kmeans(const nn::Mat& feats, int k, uint64_t seed, int max_iters) {
  const int n = feats.rows, d = feats.cols;
  Rng rng(seed);
  nn::Mat centroids(k, d);

  // k-means++ seeding.
  std::vector<double> min_d2(static_cast<size_t>(n),
                             std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.randint(0, n - 1));
  std::copy(feats.row(first), feats.row(first) + d, centroids.row(0));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      min_d2[static_cast<size_t>(i)] = std::min(
          min_d2[static_cast<size_t>(i)], exact_sq_dist(feats, i, centroids, c - 1));
      total += min_d2[static_cast<size_t>(i)];
    }
    int pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += min_d2[static_cast<size_t>(i)];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.randint(0, n - 1));
    }
    std::copy(feats.row(pick), feats.row(pick) + d, centroids.row(c));
  }

  RunResult res;
  res.assign.assign(static_cast<size_t>(n), 0);
  nn::Mat dists;
  for (int iter = 0; iter < max_iters; ++iter) {
    squared_distances(feats, centroids, dists);
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c) {
        if (dists.at(i, c) < dists.at(i, best)) best = c;
      }
      if (res.assign[static_cast<size_t>(i)] != best) {
        res.assign[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;

    nn::Mat sums(k, d);
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int c = res.assign[static_cast<size_t>(i)];
      counts[static_cast<size_t>(c)] += 1;
      for (int j = 0; j < d; ++j) sums.at(c, j) += feats.at(i, j);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) {
        // Reseed with the point currently worst-served by its centroid.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double di = dists.at(i, res.assign[static_cast<size_t>(i)]);
          if (di > far_d) {
            far_d = di;
            far = i;
          }
        }
        std::copy(feats.row(far), feats.row(far) + d, centroids.row(c));
        continue;
      }
      for (int j = 0; j < d; ++j) {
        centroids.at(c, j) = sums.at(c, j) / counts[static_cast<size_t>(c)];
      }
    }
  }

  res.inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    res.inertia += exact_sq_dist(feats, i, centroids, res.assign[static_cast<size_t>(i)]);
  }
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

std::vector<int> assign_clusters(const nn::Mat& feats, const nn::Mat& centroids) {
  if (feats.cols != centroids.cols) {
    throw ParamError("assign_clusters: feature dimension mismatch");
  }
  std::vector<int> out(static_cast<size_t>(feats.rows), 0);
  std::vector<double> dist2(static_cast<size_t>(feats.rows), 0.0);
  kernels::nearest_centroid(feats.v.data(), centroids.v.data(), feats.rows,
                            centroids.rows, feats.cols, out.data(),
                            dist2.data());
  return out;
}

Codebook fit_codebook(const nn::Mat& feats, int k, uint64_t seed, int restarts,
                      int max_iters) {
  if (k < 1) throw ParamError("fit_codebook: k must be >= 1");
  if (feats.rows < k) {
    throw ParamError("fit_codebook: fewer points (" + std::to_string(feats.rows) +
                     ") than clusters (" + std::to_string(k) + ")");
  }
  if (restarts < 1 || max_iters < 1) {
    throw ParamError("fit_codebook: restarts and max_iters must be >= 1");
  }
  RunResult best;
  for (int r = 0; r < restarts; ++r) {
    RunResult cur = run_kmeans(feats, k, derive_seed(seed, "kmeans#" + std::to_string(r)),
                               max_iters);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  Codebook cb;
  cb.centroids = std::move(best.centroids);
  cb.inertia = best.inertia;
  return cb;
}

std::vector<int> encode_units(const dsp::MelSpectrogram& mel, const Codebook& cb) {
  if (mel.n_mels != cb.dim()) {
    throw ParamError("encode_units: mel dimension does not match codebook");
  }
  nn::Mat feats = nn::mat_from(mel.frames, mel.n_frames, mel.n_mels);
  return assign_clusters(feats, cb.centroids);
}

void save_codebook(const std::string& path, const Codebook& cb, uint64_t seed,
                   const std::string& config_json) {
  Checkpoint ckpt;
  ckpt.kind = "codebook";
  ckpt.seed = seed;
  ckpt.config_json = config_json;
  ckpt.tensors.emplace_back("centroids", cb.centroids);
  nn::Mat inertia(1, 1);
  inertia.at(0, 0) = cb.inertia;
  ckpt.tensors.emplace_back("inertia", inertia);
  save_checkpoint(path, ckpt);
}

Codebook load_codebook(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "codebook") {
    throw FormatError("codebook: checkpoint kind is '" + ckpt.kind + "'");
  }
  Codebook cb;
  cb.centroids = ckpt.require("centroids");
  cb.inertia = ckpt.require("inertia").at(0, 0);
  return cb;
}

}  // namespace crossvox::codebook
