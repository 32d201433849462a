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

#ifndef CROSSVOX_NN_AUTOGRAD_H_
#define CROSSVOX_NN_AUTOGRAD_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crossvox/nn/mat.h"

namespace crossvox::nn {

// Define-by-run reverse-mode autodiff. Nodes carry a creation-order id that
// doubles as a topological order; Graph::backward walks reachable nodes in
// descending id. Parameter nodes live outside any graph (see Param) so they
// survive across steps; everything else is arena-owned by the Graph and freed
// wholesale when the Graph is destroyed.
struct Node {
  Mat val;
  Mat grad;  // allocated on first use; same shape as val
  bool requires_grad = false;
  int64_t id = 0;
  std::vector<Node*> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad();
};

using NodeP = Node*;

// Trainable tensor with persistent storage and gradient accumulator.
class Param {
 public:
  Param(std::string name, Mat init);
  const std::string& name() const { return name_; }
  NodeP node() { return node_.get(); }
  Mat& value() { return node_->val; }
  const Mat& value() const { return node_->val; }
  Mat& grad();
  void zero_grad();

 private:
  std::string name_;
  std::unique_ptr<Node> node_;
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Constant or differentiable-input leaf owned by this graph.
  NodeP input(Mat value, bool requires_grad = false);

  NodeP add(NodeP a, NodeP b);
  NodeP sub(NodeP a, NodeP b);
  NodeP mul(NodeP a, NodeP b);
  NodeP scale(NodeP a, double c);
  NodeP add_scalar(NodeP a, double c);
  // b is 1 x D broadcast over the rows of a.
  NodeP add_rowvec(NodeP a, NodeP b);
  NodeP mul_rowvec(NodeP a, NodeP b);

  NodeP matmul(NodeP a, NodeP b);     // (m x k) * (k x n)
  NodeP matmul_nt(NodeP a, NodeP b);  // (m x k) * (n x k)^T

  NodeP relu(NodeP a);
  NodeP leaky_relu(NodeP a, double slope);
  NodeP tanh_op(NodeP a);
  NodeP sigmoid(NodeP a);
  // Clamps values to [-1, 1]; gradient passes only through the interior.
  NodeP clamp1(NodeP a);
  // ln(max(x, floor)); zero gradient on floored entries.
  NodeP log_clamp(NodeP a, double floor_val);

  NodeP softmax_rows(NodeP a);
  // Mean cross-entropy over rows of logits against integer targets.
  NodeP softmax_xent(NodeP logits, const std::vector<int>& targets);

  // Row-wise standardization y = (x - mu) / (sigma + eps); mu, sigma are the
  // per-row population statistics over the feature dimension.
  NodeP rownorm(NodeP x, double eps);

  // Gather of table rows by id; gradient scatter-adds.
  NodeP embed(NodeP table, const std::vector<int>& ids);
  NodeP rows_gather(NodeP x, std::vector<int> idx);
  NodeP slice_rows(NodeP x, int r0, int r1);
  NodeP slice_cols(NodeP x, int c0, int c1);
  NodeP concat_cols(NodeP a, NodeP b);

  NodeP mean_rows(NodeP x);  // T x D -> 1 x D
  NodeP mean_all(NodeP x);   // -> 1 x 1
  NodeP sum_all(NodeP x);

  // Sliding windows for "same" convolution: odd kernel k, zero padding,
  // output row t holds the k*C window centered (w.r.t. dilation) at t.
  NodeP im2col(NodeP x, int kernel, int dilation);
  // Places row t of x at output row t * stride, zeros elsewhere; out_rows
  // must be >= (rows - 1) * stride + 1.
  NodeP zero_stuff(NodeP x, int stride, int out_rows);

  NodeP l1_loss(NodeP a, NodeP b);
  NodeP mse_loss(NodeP a, NodeP b);
  // sqrt(sum((a - b)^2) + eps), the Frobenius distance.
  NodeP frob_dist(NodeP a, NodeP b);
  NodeP cosine_sim(NodeP a, NodeP b);  // 1 x D vs 1 x D

  // Magnitude STFT of an N x 1 waveform; identical values to the DSP-side
  // spectrogram so spectral losses and feature extraction agree exactly.
  NodeP stft_mag(NodeP wav, int n_fft, int hop, int win, bool center);

  // Inverted dropout with a mask drawn deterministically from the seed.
  NodeP dropout(NodeP a, double p, uint64_t seed);

  void backward(NodeP loss);
  size_t size() const { return nodes_.size(); }

 private:
  NodeP make(Mat value, std::vector<NodeP> parents,
             std::function<void(Node&)> bw);
  std::deque<std::unique_ptr<Node>> nodes_;
};

}  // namespace crossvox::nn

#endif  // CROSSVOX_NN_AUTOGRAD_H_
