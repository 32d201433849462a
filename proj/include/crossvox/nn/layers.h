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

#ifndef CROSSVOX_NN_LAYERS_H_
#define CROSSVOX_NN_LAYERS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crossvox/nn/autograd.h"

namespace crossvox::nn {

// Every model keeps its Params in one registry so checkpointing, Adam, and
// gradient zeroing all see the same ordered list. Parameter values are
// initialized from Rng(derive_seed(model_seed, param_name)), which makes the
// init independent of creation order.
class ParamRegistry {
 public:
  explicit ParamRegistry(uint64_t seed) : seed_(seed) {}

  enum class Init { kZeros, kOnes, kXavier, kNormal02 };
  Param* create(const std::string& name, int rows, int cols, Init init);

  const std::vector<std::unique_ptr<Param>>& params() const { return params_; }
  Param* find(const std::string& name) const;
  void zero_grad();
  uint64_t seed() const { return seed_; }
  // Marks every parameter as non-trainable; gradients no longer flow into
  // them (they still pass through, which frozen loss networks rely on).
  void freeze();

 private:
  uint64_t seed_;
  std::vector<std::unique_ptr<Param>> params_;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParamRegistry& reg, const std::string& name, int in, int out,
         ParamRegistry::Init w_init = ParamRegistry::Init::kXavier);
  NodeP forward(Graph& g, NodeP x) const;

 private:
  Param* w_ = nullptr;
  Param* b_ = nullptr;
};

// "Same" 1-D convolution over a T x C sequence via im2col + GEMM.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParamRegistry& reg, const std::string& name, int in_ch, int out_ch,
         int kernel, int dilation = 1);
  NodeP forward(Graph& g, NodeP x) const;

 private:
  Param* w_ = nullptr;  // (kernel * in_ch) x out_ch
  Param* b_ = nullptr;
  int kernel_ = 1;
  int dilation_ = 1;
};

// Transposed convolution: zero-stuff by the stride, then a same-convolution
// with kernel 2 * stride + 1 covers every phase of the upsampled grid.
class TConv1d {
 public:
  TConv1d() = default;
  TConv1d(ParamRegistry& reg, const std::string& name, int in_ch, int out_ch,
          int stride);
  // T x C -> (T * stride) x out_ch
  NodeP forward(Graph& g, NodeP x) const;
  int stride() const { return stride_; }

 private:
  Conv1d conv_;
  int stride_ = 1;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamRegistry& reg, const std::string& name, int count, int dim);
  NodeP forward(Graph& g, const std::vector<int>& ids) const;
  NodeP table() const { return table_->node(); }

 private:
  Param* table_ = nullptr;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamRegistry& reg, const std::string& name, int dim,
            double eps = 1e-5);
  NodeP forward(Graph& g, NodeP x) const;

 private:
  Param* gain_ = nullptr;
  Param* bias_ = nullptr;
  double eps_ = 1e-5;
};

// Speaker-emotion adaptive layer normalization: standardize each feature
// vector, then scale by g(S) and shift by b(E), each a single affine layer of
// the conditioning embedding. At init g() == 1 and b() == 0, making the
// module exactly plain layer normalization.
class Sealn {
 public:
  Sealn() = default;
  Sealn(ParamRegistry& reg, const std::string& name, int dim, int spk_dim,
        int emo_dim, double eps = 1e-5);
  NodeP forward(Graph& g, NodeP x, NodeP spk_emb, NodeP emo_emb) const;

 private:
  Param* wg_ = nullptr;  // spk_dim x dim, zeros
  Param* bg_ = nullptr;  // 1 x dim, ones
  Param* wb_ = nullptr;  // emo_dim x dim, zeros
  Param* bb_ = nullptr;  // 1 x dim, zeros
  double eps_ = 1e-5;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamRegistry& reg, const std::string& name, int dim,
                     int heads);
  NodeP forward(Graph& g, NodeP x) const;

 private:
  Linear wq_, wk_, wv_, wo_;
  int dim_ = 0;
  int heads_ = 1;
};

// Pre-norm transformer block: x + MHSA(LN(x)), then x + FFN(LN(x)).
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(ParamRegistry& reg, const std::string& name, int dim,
                   int heads, int ffn_dim);
  NodeP forward(Graph& g, NodeP x, double dropout_p, uint64_t drop_seed) const;

 private:
  LayerNorm ln1_, ln2_;
  MultiHeadAttention attn_;
  Linear ff1_, ff2_;
};

// Sinusoidal position encoding, T x dim.
Mat positional_encoding(int t_len, int dim);

}  // namespace crossvox::nn

#endif  // CROSSVOX_NN_LAYERS_H_
