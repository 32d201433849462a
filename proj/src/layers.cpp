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

#include "crossvox/nn/layers.h"

#include <cmath>

#include "crossvox/common.h"

namespace crossvox::nn {

Param* ParamRegistry::create(const std::string& name, int rows, int cols,
                             Init init) {
  if (find(name) != nullptr) {
    throw ParamError("param registry: duplicate name " + name);
  }
  Mat m(rows, cols);
  Rng rng(derive_seed(seed_, name));
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kOnes:
      for (double& v : m.v) v = 1.0;
      break;
    case Init::kXavier: {
      const double a = std::sqrt(6.0 / (rows + cols));
      for (double& v : m.v) v = rng.uniform(-a, a);
      break;
    }
    case Init::kNormal02:
      for (double& v : m.v) v = 0.02 * rng.normal();
      break;
  }
  params_.push_back(std::make_unique<Param>(name, std::move(m)));
  return params_.back().get();
}

Param* ParamRegistry::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

void ParamRegistry::zero_grad() {
  for (const auto& p : params_) p->zero_grad();
}

void ParamRegistry::freeze() {
  for (const auto& p : params_) p->node()->requires_grad = false;
}

Linear::Linear(ParamRegistry& reg, const std::string& name, int in, int out,
               ParamRegistry::Init w_init) {
  w_ = reg.create(name + ".w", in, out, w_init);
  b_ = reg.create(name + ".b", 1, out, ParamRegistry::Init::kZeros);
}

NodeP Linear::forward(Graph& g, NodeP x) const {
  return g.add_rowvec(g.matmul(x, w_->node()), b_->node());
}

Conv1d::Conv1d(ParamRegistry& reg, const std::string& name, int in_ch,
               int out_ch, int kernel, int dilation)
    : kernel_(kernel), dilation_(dilation) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ParamError("conv1d: kernel must be odd, got " + std::to_string(kernel));
  }
  w_ = reg.create(name + ".w", kernel * in_ch, out_ch,
                  ParamRegistry::Init::kXavier);
  b_ = reg.create(name + ".b", 1, out_ch, ParamRegistry::Init::kZeros);
}

NodeP Conv1d::forward(Graph& g, NodeP x) const {
  NodeP cols = g.im2col(x, kernel_, dilation_);
  return g.add_rowvec(g.matmul(cols, w_->node()), b_->node());
}

TConv1d::TConv1d(ParamRegistry& reg, const std::string& name, int in_ch,
                 int out_ch, int stride)
    : stride_(stride) {
  if (stride < 1) throw ParamError("tconv1d: stride must be >= 1");
  conv_ = Conv1d(reg, name, in_ch, out_ch, 2 * stride + 1);
}

NodeP TConv1d::forward(Graph& g, NodeP x) const {
  NodeP stuffed = g.zero_stuff(x, stride_, x->val.rows * stride_);
  return conv_.forward(g, stuffed);
}

Embedding::Embedding(ParamRegistry& reg, const std::string& name, int count,
                     int dim) {
  table_ = reg.create(name + ".table", count, dim, ParamRegistry::Init::kNormal02);
}

NodeP Embedding::forward(Graph& g, const std::vector<int>& ids) const {
  return g.embed(table_->node(), ids);
}

LayerNorm::LayerNorm(ParamRegistry& reg, const std::string& name, int dim,
                     double eps)
    : eps_(eps) {
  gain_ = reg.create(name + ".gain", 1, dim, ParamRegistry::Init::kOnes);
  bias_ = reg.create(name + ".bias", 1, dim, ParamRegistry::Init::kZeros);
}

NodeP LayerNorm::forward(Graph& g, NodeP x) const {
  return g.add_rowvec(g.mul_rowvec(g.rownorm(x, eps_), gain_->node()),
                      bias_->node());
}

Sealn::Sealn(ParamRegistry& reg, const std::string& name, int dim, int spk_dim,
             int emo_dim, double eps)
    : eps_(eps) {
  wg_ = reg.create(name + ".wg", spk_dim, dim, ParamRegistry::Init::kZeros);
  bg_ = reg.create(name + ".bg", 1, dim, ParamRegistry::Init::kOnes);
  wb_ = reg.create(name + ".wb", emo_dim, dim, ParamRegistry::Init::kZeros);
  bb_ = reg.create(name + ".bb", 1, dim, ParamRegistry::Init::kZeros);
}

NodeP Sealn::forward(Graph& g, NodeP x, NodeP spk_emb, NodeP emo_emb) const {
  NodeP y = g.rownorm(x, eps_);
  NodeP gain = g.add_rowvec(g.matmul(spk_emb, wg_->node()), bg_->node());
  NodeP bias = g.add_rowvec(g.matmul(emo_emb, wb_->node()), bb_->node());
  return g.add_rowvec(g.mul_rowvec(y, gain), bias);
}

MultiHeadAttention::MultiHeadAttention(ParamRegistry& reg,
                                       const std::string& name, int dim,
                                       int heads)
    : dim_(dim), heads_(heads) {
  if (heads < 1 || dim % heads != 0) {
    throw ParamError("attention: dim must be divisible by heads");
  }
  wq_ = Linear(reg, name + ".q", dim, dim);
  wk_ = Linear(reg, name + ".k", dim, dim);
  wv_ = Linear(reg, name + ".v", dim, dim);
  wo_ = Linear(reg, name + ".o", dim, dim);
}

NodeP MultiHeadAttention::forward(Graph& g, NodeP x) const {
  NodeP q = wq_.forward(g, x);
  NodeP k = wk_.forward(g, x);
  NodeP v = wv_.forward(g, x);
  const int dh = dim_ / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  NodeP merged = nullptr;
  for (int h = 0; h < heads_; ++h) {
    NodeP qh = g.slice_cols(q, h * dh, (h + 1) * dh);
    NodeP kh = g.slice_cols(k, h * dh, (h + 1) * dh);
    NodeP vh = g.slice_cols(v, h * dh, (h + 1) * dh);
    NodeP scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt);
    NodeP probs = g.softmax_rows(scores);
    NodeP oh = g.matmul(probs, vh);
    merged = merged == nullptr ? oh : g.concat_cols(merged, oh);
  }
  return wo_.forward(g, merged);
}

TransformerBlock::TransformerBlock(ParamRegistry& reg, const std::string& name,
                                   int dim, int heads, int ffn_dim) {
  ln1_ = LayerNorm(reg, name + ".ln1", dim);
  ln2_ = LayerNorm(reg, name + ".ln2", dim);
  attn_ = MultiHeadAttention(reg, name + ".attn", dim, heads);
  ff1_ = Linear(reg, name + ".ff1", dim, ffn_dim);
  ff2_ = Linear(reg, name + ".ff2", ffn_dim, dim);
}

NodeP TransformerBlock::forward(Graph& g, NodeP x, double dropout_p,
                                uint64_t drop_seed) const {
  NodeP a = attn_.forward(g, ln1_.forward(g, x));
  if (dropout_p > 0.0) a = g.dropout(a, dropout_p, mix64(drop_seed ^ 0x1111));
  x = g.add(x, a);
  NodeP f = ff2_.forward(g, g.relu(ff1_.forward(g, ln2_.forward(g, x))));
  if (dropout_p > 0.0) f = g.dropout(f, dropout_p, mix64(drop_seed ^ 0x2222));
  return g.add(x, f);
}

Mat positional_encoding(int t_len, int dim) {
  Mat pe(t_len, dim);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < dim / 2; ++j) {
      const double freq = std::pow(10000.0, -2.0 * j / dim);
      pe.at(t, 2 * j) = std::sin(t * freq);
      pe.at(t, 2 * j + 1) = std::cos(t * freq);
    }
  }
  return pe;
}

}  // namespace crossvox::nn
