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

#ifndef CROSSVOX_CODEBOOK_H_
#define CROSSVOX_CODEBOOK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "crossvox/dsp.h"
#include "crossvox/nn/mat.h"

namespace crossvox::codebook {

struct Codebook {
  nn::Mat centroids;  // k x dim
  double inertia = 0.0;
  int k() const { return centroids.rows; }
  int dim() const { return centroids.cols; }
};

// Nearest centroid per row under squared Euclidean distance, ties broken
// toward the lowest centroid index.
std::vector<int> assign_clusters(const nn::Mat& feats, const nn::Mat& centroids);

// Seeded k-means++ with Lloyd iterations. Runs `restarts` independent seeded
// inits and keeps the lowest-inertia result (ties toward the earliest
// restart). Empty clusters are reseeded deterministically with the point
// farthest from its assigned centroid.
Codebook fit_codebook(const nn::Mat& feats, int k, uint64_t seed,
                      int restarts = 6, int max_iters = 40);

// Frame-level unit ids for a mel spectrogram; output length equals the frame
// count.
std::vector<int> encode_units(const dsp::MelSpectrogram& mel, const Codebook& cb);

void save_codebook(const std::string& path, const Codebook& cb, uint64_t seed,
                   const std::string& config_json);
Codebook load_codebook(const std::string& path);

}  // namespace crossvox::codebook

#endif  // CROSSVOX_CODEBOOK_H_
