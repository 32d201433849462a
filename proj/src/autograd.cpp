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

#include "crossvox/nn/autograd.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <unordered_set>

#include "crossvox/common.h"
#include "crossvox/dsp.h"
#include "crossvox/fft.h"
#include "crossvox/kernels.h"

namespace crossvox::nn {

namespace {

std::atomic<int64_t> g_next_id{1};

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ParamError(std::string(op) + ": shape mismatch (" +
                     std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " vs " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols) + ")");
  }
}

bool any_requires_grad(const std::vector<NodeP>& parents) {
  for (NodeP p : parents) {
    if (p != nullptr && p->requires_grad) return true;
  }
  return false;
}

}  // namespace

Mat mat_from(const std::vector<double>& data, int rows, int cols) {
  if (data.size() != static_cast<size_t>(rows) * cols) {
    throw ParamError("mat_from: data size does not match shape");
  }
  Mat m(rows, cols);
  m.v = data;
  return m;
}

Mat mat_col(const std::vector<double>& data) {
  return mat_from(data, static_cast<int>(data.size()), 1);
}

void Node::ensure_grad() {
  if (grad.rows != val.rows || grad.cols != val.cols) {
    grad = Mat(val.rows, val.cols);
  }
}

Param::Param(std::string name, Mat init) : name_(std::move(name)) {
  node_ = std::make_unique<Node>();
  node_->val = std::move(init);
  node_->requires_grad = true;
  node_->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
}

Mat& Param::grad() {
  node_->ensure_grad();
  return node_->grad;
}

void Param::zero_grad() {
  node_->ensure_grad();
  std::fill(node_->grad.v.begin(), node_->grad.v.end(), 0.0);
}

NodeP Graph::make(Mat value, std::vector<NodeP> parents,
                  std::function<void(Node&)> bw) {
  auto node = std::make_unique<Node>();
  node->val = std::move(value);
  node->parents = std::move(parents);
  node->requires_grad = any_requires_grad(node->parents);
  if (node->requires_grad) node->backward_fn = std::move(bw);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  nodes_.push_back(std::move(node));
  return nodes_.back().get();
}

NodeP Graph::input(Mat value, bool requires_grad) {
  NodeP n = make(std::move(value), {}, nullptr);
  n->requires_grad = requires_grad;
  return n;
}

NodeP Graph::add(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "add");
  Mat out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] += b->val.v[i];
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += n.grad.v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) b->grad.v[i] += n.grad.v[i];
    }
  });
}

NodeP Graph::sub(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "sub");
  Mat out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] -= b->val.v[i];
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += n.grad.v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) b->grad.v[i] -= n.grad.v[i];
    }
  });
}

NodeP Graph::mul(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "mul");
  Mat out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] *= b->val.v[i];
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) {
        a->grad.v[i] += n.grad.v[i] * b->val.v[i];
      }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) {
        b->grad.v[i] += n.grad.v[i] * a->val.v[i];
      }
    }
  });
}

NodeP Graph::scale(NodeP a, double c) {
  Mat out = a->val;
  for (double& v : out.v) v *= c;
  return make(std::move(out), {a}, [a, c](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += c * n.grad.v[i];
  });
}

NodeP Graph::add_scalar(NodeP a, double c) {
  Mat out = a->val;
  for (double& v : out.v) v += c;
  return make(std::move(out), {a}, [a](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += n.grad.v[i];
  });
}

NodeP Graph::add_rowvec(NodeP a, NodeP b) {
  if (b->val.rows != 1 || b->val.cols != a->val.cols) {
    throw ParamError("add_rowvec: b must be 1 x cols(a)");
  }
  Mat out = a->val;
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += b->val.at(0, j);
  }
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) a->grad.v[i] += n.grad.v[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (int i = 0; i < n.grad.rows; ++i) {
        for (int j = 0; j < n.grad.cols; ++j) b->grad.at(0, j) += n.grad.at(i, j);
      }
    }
  });
}

NodeP Graph::mul_rowvec(NodeP a, NodeP b) {
  if (b->val.rows != 1 || b->val.cols != a->val.cols) {
    throw ParamError("mul_rowvec: b must be 1 x cols(a)");
  }
  Mat out = a->val;
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) out.at(i, j) *= b->val.at(0, j);
  }
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (int i = 0; i < n.grad.rows; ++i) {
        for (int j = 0; j < n.grad.cols; ++j) {
          a->grad.at(i, j) += n.grad.at(i, j) * b->val.at(0, j);
        }
      }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (int i = 0; i < n.grad.rows; ++i) {
        for (int j = 0; j < n.grad.cols; ++j) {
          b->grad.at(0, j) += n.grad.at(i, j) * a->val.at(i, j);
        }
      }
    }
  });
}

NodeP Graph::matmul(NodeP a, NodeP b) {
  if (a->val.cols != b->val.rows) {
    throw ParamError("matmul: inner dimensions differ (" +
                     std::to_string(a->val.cols) + " vs " +
                     std::to_string(b->val.rows) + ")");
  }
  const int m = a->val.rows, k = a->val.cols, n = b->val.cols;
  Mat out(m, n);
  kernels::gemm_nn(a->val.v.data(), b->val.v.data(), out.v.data(), m, k, n,
                   false);
  return make(std::move(out), {a, b}, [a, b, m, k, n](Node& node) {
    if (a->requires_grad) {
      a->ensure_grad();
      kernels::gemm_nt(node.grad.v.data(), b->val.v.data(), a->grad.v.data(),
                       m, n, k, true);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      kernels::gemm_tn(a->val.v.data(), node.grad.v.data(), b->grad.v.data(),
                       m, k, n, true);
    }
  });
}

NodeP Graph::matmul_nt(NodeP a, NodeP b) {
  if (a->val.cols != b->val.cols) {
    throw ParamError("matmul_nt: feature dimensions differ");
  }
  const int m = a->val.rows, k = a->val.cols, n = b->val.rows;
  Mat out(m, n);
  kernels::gemm_nt(a->val.v.data(), b->val.v.data(), out.v.data(), m, k, n,
                   false);
  return make(std::move(out), {a, b}, [a, b, m, k, n](Node& node) {
    if (a->requires_grad) {
      a->ensure_grad();
      kernels::gemm_nn(node.grad.v.data(), b->val.v.data(), a->grad.v.data(),
                       m, n, k, true);
    }
    if (b->requires_grad) {
      b->ensure_grad();
      kernels::gemm_tn(node.grad.v.data(), a->val.v.data(), b->grad.v.data(),
                       m, n, k, true);
    }
  });
}

NodeP Graph::relu(NodeP a) {
  Mat out = a->val;
  for (double& v : out.v) v = std::max(v, 0.0);
  return make(std::move(out), {a}, [a](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      if (a->val.v[i] > 0.0) a->grad.v[i] += n.grad.v[i];
    }
  });
}

NodeP Graph::leaky_relu(NodeP a, double slope) {
  Mat out = a->val;
  for (double& v : out.v) v = v > 0.0 ? v : slope * v;
  return make(std::move(out), {a}, [a, slope](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      a->grad.v[i] += n.grad.v[i] * (a->val.v[i] > 0.0 ? 1.0 : slope);
    }
  });
}

NodeP Graph::tanh_op(NodeP a) {
  Mat out = a->val;
  for (double& v : out.v) v = std::tanh(v);
  NodeP n = make(std::move(out), {a}, nullptr);
  if (n->requires_grad) {
    n->backward_fn = [a, n](Node& node) {
      a->ensure_grad();
      for (size_t i = 0; i < node.grad.size(); ++i) {
        const double y = n->val.v[i];
        a->grad.v[i] += node.grad.v[i] * (1.0 - y * y);
      }
    };
  }
  return n;
}

NodeP Graph::sigmoid(NodeP a) {
  Mat out = a->val;
  for (double& v : out.v) v = 1.0 / (1.0 + std::exp(-v));
  NodeP n = make(std::move(out), {a}, nullptr);
  if (n->requires_grad) {
    n->backward_fn = [a, n](Node& node) {
      a->ensure_grad();
      for (size_t i = 0; i < node.grad.size(); ++i) {
        const double y = n->val.v[i];
        a->grad.v[i] += node.grad.v[i] * y * (1.0 - y);
      }
    };
  }
  return n;
}

NodeP Graph::clamp1(NodeP a) {
  Mat out = a->val;
  for (double& v : out.v) v = std::clamp(v, -1.0, 1.0);
  return make(std::move(out), {a}, [a](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      if (a->val.v[i] > -1.0 && a->val.v[i] < 1.0) a->grad.v[i] += n.grad.v[i];
    }
  });
}

NodeP Graph::log_clamp(NodeP a, double floor_val) {
  if (floor_val <= 0.0) throw ParamError("log_clamp: floor must be positive");
  Mat out = a->val;
  for (double& v : out.v) v = std::log(std::max(v, floor_val));
  return make(std::move(out), {a}, [a, floor_val](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      if (a->val.v[i] > floor_val) a->grad.v[i] += n.grad.v[i] / a->val.v[i];
    }
  });
}

NodeP Graph::softmax_rows(NodeP a) {
  Mat out = a->val;
  for (int i = 0; i < out.rows; ++i) {
    double mx = out.at(i, 0);
    for (int j = 1; j < out.cols; ++j) mx = std::max(mx, out.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < out.cols; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int j = 0; j < out.cols; ++j) out.at(i, j) /= sum;
  }
  NodeP n = make(std::move(out), {a}, nullptr);
  if (n->requires_grad) {
    n->backward_fn = [a, n](Node& node) {
      a->ensure_grad();
      for (int i = 0; i < node.grad.rows; ++i) {
        double dot = 0.0;
        for (int j = 0; j < node.grad.cols; ++j) {
          dot += node.grad.at(i, j) * n->val.at(i, j);
        }
        for (int j = 0; j < node.grad.cols; ++j) {
          a->grad.at(i, j) += n->val.at(i, j) * (node.grad.at(i, j) - dot);
        }
      }
    };
  }
  return n;
}

NodeP Graph::softmax_xent(NodeP logits, const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != logits->val.rows) {
    throw ParamError("softmax_xent: one target per logit row required");
  }
  const int t_count = logits->val.rows;
  const int k_count = logits->val.cols;
  auto probs = std::make_shared<Mat>(t_count, k_count);
  double loss = 0.0;
  for (int i = 0; i < t_count; ++i) {
    const int y = targets[static_cast<size_t>(i)];
    if (y < 0 || y >= k_count) throw ParamError("softmax_xent: target out of range");
    double mx = logits->val.at(i, 0);
    for (int j = 1; j < k_count; ++j) mx = std::max(mx, logits->val.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < k_count; ++j) sum += std::exp(logits->val.at(i, j) - mx);
    const double lse = mx + std::log(sum);
    loss += lse - logits->val.at(i, y);
    for (int j = 0; j < k_count; ++j) {
      probs->at(i, j) = std::exp(logits->val.at(i, j) - lse);
    }
  }
  Mat out(1, 1);
  out.at(0, 0) = loss / t_count;
  std::vector<int> tgt = targets;
  return make(std::move(out), {logits},
              [logits, probs, tgt = std::move(tgt)](Node& n) {
                logits->ensure_grad();
                const double g = n.grad.at(0, 0) / probs->rows;
                for (int i = 0; i < probs->rows; ++i) {
                  for (int j = 0; j < probs->cols; ++j) {
                    const double ind = j == tgt[static_cast<size_t>(i)] ? 1.0 : 0.0;
                    logits->grad.at(i, j) += g * (probs->at(i, j) - ind);
                  }
                }
              });
}

NodeP Graph::rownorm(NodeP x, double eps) {
  if (eps <= 0.0) throw ParamError("rownorm: eps must be positive");
  const int rows = x->val.rows, cols = x->val.cols;
  Mat out(rows, cols);
  auto stats = std::make_shared<Mat>(rows, 2);  // mu, sigma per row
  for (int i = 0; i < rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < cols; ++j) mu += x->val.at(i, j);
    mu /= cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double c = x->val.at(i, j) - mu;
      var += c * c;
    }
    var /= cols;
    const double sigma = std::sqrt(var);
    stats->at(i, 0) = mu;
    stats->at(i, 1) = sigma;
    const double s = sigma + eps;
    for (int j = 0; j < cols; ++j) out.at(i, j) = (x->val.at(i, j) - mu) / s;
  }
  return make(std::move(out), {x}, [x, stats, eps, cols](Node& n) {
    x->ensure_grad();
    for (int i = 0; i < n.grad.rows; ++i) {
      const double mu = stats->at(i, 0);
      const double sigma = stats->at(i, 1);
      const double s = sigma + eps;
      double gc = 0.0;  // sum_k dy_k * c_k
      double gs = 0.0;  // sum_k dy_k
      for (int j = 0; j < cols; ++j) {
        gc += n.grad.at(i, j) * (x->val.at(i, j) - mu);
        gs += n.grad.at(i, j);
      }
      const double sig_term = sigma > 1e-12 ? gc / (cols * sigma * s * s) : 0.0;
      double mean_dc = 0.0;
      for (int j = 0; j < cols; ++j) {
        const double c = x->val.at(i, j) - mu;
        mean_dc += n.grad.at(i, j) / s - sig_term * c;
      }
      mean_dc /= cols;
      for (int j = 0; j < cols; ++j) {
        const double c = x->val.at(i, j) - mu;
        x->grad.at(i, j) += n.grad.at(i, j) / s - sig_term * c - mean_dc;
      }
    }
  });
}

NodeP Graph::embed(NodeP table, const std::vector<int>& ids) {
  return rows_gather(table, ids);
}

NodeP Graph::rows_gather(NodeP x, std::vector<int> idx) {
  const int rows = static_cast<int>(idx.size());
  for (int r : idx) {
    if (r < 0 || r >= x->val.rows) throw ParamError("rows_gather: index out of range");
  }
  Mat out(rows, x->val.cols);
  for (int i = 0; i < rows; ++i) {
    const double* src = x->val.row(idx[static_cast<size_t>(i)]);
    std::copy(src, src + x->val.cols, out.row(i));
  }
  return make(std::move(out), {x}, [x, idx = std::move(idx)](Node& n) {
    x->ensure_grad();
    for (int i = 0; i < n.grad.rows; ++i) {
      double* dst = x->grad.row(idx[static_cast<size_t>(i)]);
      const double* src = n.grad.row(i);
      for (int j = 0; j < n.grad.cols; ++j) dst[j] += src[j];
    }
  });
}

NodeP Graph::slice_rows(NodeP x, int r0, int r1) {
  if (r0 < 0 || r1 > x->val.rows || r0 >= r1) {
    throw ParamError("slice_rows: bad range");
  }
  std::vector<int> idx(static_cast<size_t>(r1 - r0));
  for (int i = r0; i < r1; ++i) idx[static_cast<size_t>(i - r0)] = i;
  return rows_gather(x, std::move(idx));
}

NodeP Graph::slice_cols(NodeP x, int c0, int c1) {
  if (c0 < 0 || c1 > x->val.cols || c0 >= c1) {
    throw ParamError("slice_cols: bad range");
  }
  Mat out(x->val.rows, c1 - c0);
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) out.at(i, j) = x->val.at(i, c0 + j);
  }
  return make(std::move(out), {x}, [x, c0](Node& n) {
    x->ensure_grad();
    for (int i = 0; i < n.grad.rows; ++i) {
      for (int j = 0; j < n.grad.cols; ++j) {
        x->grad.at(i, c0 + j) += n.grad.at(i, j);
      }
    }
  });
}

NodeP Graph::concat_cols(NodeP a, NodeP b) {
  if (a->val.rows != b->val.rows) throw ParamError("concat_cols: row mismatch");
  Mat out(a->val.rows, a->val.cols + b->val.cols);
  for (int i = 0; i < out.rows; ++i) {
    std::copy(a->val.row(i), a->val.row(i) + a->val.cols, out.row(i));
    std::copy(b->val.row(i), b->val.row(i) + b->val.cols,
              out.row(i) + a->val.cols);
  }
  const int ac = a->val.cols;
  return make(std::move(out), {a, b}, [a, b, ac](Node& n) {
    if (a->requires_grad) {
      a->ensure_grad();
      for (int i = 0; i < n.grad.rows; ++i) {
        for (int j = 0; j < ac; ++j) a->grad.at(i, j) += n.grad.at(i, j);
      }
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (int i = 0; i < n.grad.rows; ++i) {
        for (int j = 0; j < b->val.cols; ++j) {
          b->grad.at(i, j) += n.grad.at(i, ac + j);
        }
      }
    }
  });
}

NodeP Graph::mean_rows(NodeP x) {
  Mat out(1, x->val.cols);
  for (int i = 0; i < x->val.rows; ++i) {
    for (int j = 0; j < x->val.cols; ++j) out.at(0, j) += x->val.at(i, j);
  }
  for (double& v : out.v) v /= x->val.rows;
  const int rows = x->val.rows;
  return make(std::move(out), {x}, [x, rows](Node& n) {
    x->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < n.grad.cols; ++j) {
        x->grad.at(i, j) += n.grad.at(0, j) / rows;
      }
    }
  });
}

NodeP Graph::mean_all(NodeP x) {
  Mat out(1, 1);
  for (double v : x->val.v) out.at(0, 0) += v;
  out.at(0, 0) /= static_cast<double>(x->val.size());
  return make(std::move(out), {x}, [x](Node& n) {
    x->ensure_grad();
    const double g = n.grad.at(0, 0) / static_cast<double>(x->val.size());
    for (size_t i = 0; i < x->grad.size(); ++i) x->grad.v[i] += g;
  });
}

NodeP Graph::sum_all(NodeP x) {
  Mat out(1, 1);
  for (double v : x->val.v) out.at(0, 0) += v;
  return make(std::move(out), {x}, [x](Node& n) {
    x->ensure_grad();
    const double g = n.grad.at(0, 0);
    for (size_t i = 0; i < x->grad.size(); ++i) x->grad.v[i] += g;
  });
}

NodeP Graph::im2col(NodeP x, int kernel, int dilation) {
  if (kernel < 1 || kernel % 2 == 0) throw ParamError("im2col: kernel must be odd");
  if (dilation < 1) throw ParamError("im2col: dilation must be >= 1");
  const int rows = x->val.rows, ch = x->val.cols;
  const int half = kernel / 2;
  Mat out(rows, kernel * ch);
  for (int t = 0; t < rows; ++t) {
    for (int j = 0; j < kernel; ++j) {
      const int src = t + (j - half) * dilation;
      if (src < 0 || src >= rows) continue;
      std::copy(x->val.row(src), x->val.row(src) + ch, out.row(t) + j * ch);
    }
  }
  return make(std::move(out), {x}, [x, kernel, dilation, half, ch](Node& n) {
    x->ensure_grad();
    for (int t = 0; t < n.grad.rows; ++t) {
      for (int j = 0; j < kernel; ++j) {
        const int src = t + (j - half) * dilation;
        if (src < 0 || src >= x->val.rows) continue;
        double* dst = x->grad.row(src);
        const double* g = n.grad.row(t) + j * ch;
        for (int c = 0; c < ch; ++c) dst[c] += g[c];
      }
    }
  });
}

NodeP Graph::zero_stuff(NodeP x, int stride, int out_rows) {
  if (stride < 1) throw ParamError("zero_stuff: stride must be >= 1");
  if (out_rows < (x->val.rows - 1) * stride + 1) {
    throw ParamError("zero_stuff: out_rows too small");
  }
  Mat out(out_rows, x->val.cols);
  for (int t = 0; t < x->val.rows; ++t) {
    std::copy(x->val.row(t), x->val.row(t) + x->val.cols, out.row(t * stride));
  }
  return make(std::move(out), {x}, [x, stride](Node& n) {
    x->ensure_grad();
    for (int t = 0; t < x->val.rows; ++t) {
      const double* g = n.grad.row(t * stride);
      double* dst = x->grad.row(t);
      for (int c = 0; c < x->val.cols; ++c) dst[c] += g[c];
    }
  });
}

NodeP Graph::l1_loss(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "l1_loss");
  Mat out(1, 1);
  for (size_t i = 0; i < a->val.size(); ++i) {
    out.at(0, 0) += std::abs(a->val.v[i] - b->val.v[i]);
  }
  out.at(0, 0) /= static_cast<double>(a->val.size());
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    const double g = n.grad.at(0, 0) / static_cast<double>(a->val.size());
    for (size_t i = 0; i < a->val.size(); ++i) {
      const double d = a->val.v[i] - b->val.v[i];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.v[i] += g * s;
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.v[i] -= g * s;
      }
    }
  });
}

NodeP Graph::mse_loss(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "mse_loss");
  Mat out(1, 1);
  for (size_t i = 0; i < a->val.size(); ++i) {
    const double d = a->val.v[i] - b->val.v[i];
    out.at(0, 0) += d * d;
  }
  out.at(0, 0) /= static_cast<double>(a->val.size());
  return make(std::move(out), {a, b}, [a, b](Node& n) {
    const double g = 2.0 * n.grad.at(0, 0) / static_cast<double>(a->val.size());
    for (size_t i = 0; i < a->val.size(); ++i) {
      const double d = a->val.v[i] - b->val.v[i];
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.v[i] += g * d;
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.v[i] -= g * d;
      }
    }
  });
}

NodeP Graph::frob_dist(NodeP a, NodeP b) {
  check_same_shape(a->val, b->val, "frob_dist");
  constexpr double kEps = 1e-12;
  double acc = kEps;
  for (size_t i = 0; i < a->val.size(); ++i) {
    const double d = a->val.v[i] - b->val.v[i];
    acc += d * d;
  }
  Mat out(1, 1);
  out.at(0, 0) = std::sqrt(acc);
  const double y = out.at(0, 0);
  return make(std::move(out), {a, b}, [a, b, y](Node& n) {
    const double g = n.grad.at(0, 0) / y;
    for (size_t i = 0; i < a->val.size(); ++i) {
      const double d = a->val.v[i] - b->val.v[i];
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.v[i] += g * d;
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.v[i] -= g * d;
      }
    }
  });
}

NodeP Graph::cosine_sim(NodeP a, NodeP b) {
  if (a->val.rows != 1 || b->val.rows != 1 || a->val.cols != b->val.cols) {
    throw ParamError("cosine_sim: expects two 1 x D vectors");
  }
  constexpr double kEps = 1e-12;
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int j = 0; j < a->val.cols; ++j) {
    dot += a->val.at(0, j) * b->val.at(0, j);
    na2 += a->val.at(0, j) * a->val.at(0, j);
    nb2 += b->val.at(0, j) * b->val.at(0, j);
  }
  const double denom = std::max(std::sqrt(na2) * std::sqrt(nb2), kEps);
  Mat out(1, 1);
  out.at(0, 0) = dot / denom;
  const double y = out.at(0, 0);
  return make(std::move(out), {a, b}, [a, b, y, denom, na2, nb2](Node& n) {
    const double g = n.grad.at(0, 0);
    for (int j = 0; j < a->val.cols; ++j) {
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.at(0, j) += g * (b->val.at(0, j) / denom -
                                 y * a->val.at(0, j) / std::max(na2, 1e-24));
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.at(0, j) += g * (a->val.at(0, j) / denom -
                                 y * b->val.at(0, j) / std::max(nb2, 1e-24));
      }
    }
  });
}

NodeP Graph::stft_mag(NodeP wav, int n_fft, int hop, int win, bool center) {
  if (wav->val.cols != 1) throw ParamError("stft_mag: waveform must be N x 1");
  int n_frames = 0;
  std::vector<double> mags =
      dsp::stft_magnitude(wav->val.v, n_fft, hop, win, center, &n_frames);
  const int n_bins = n_fft / 2 + 1;
  Mat out = mat_from(mags, n_frames, n_bins);
  NodeP node = make(std::move(out), {wav}, nullptr);
  if (!node->requires_grad) return node;

  node->backward_fn = [wav, node, n_fft, hop, win, center, n_bins](Node& n) {
    wav->ensure_grad();
    const int len = wav->val.rows;
    const int pad = center ? (win - hop) / 2 : 0;
    std::vector<double> window(static_cast<size_t>(win));
    for (int i = 0; i < win; ++i) {
      window[static_cast<size_t>(i)] =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);
    }
    std::vector<double> buf(static_cast<size_t>(n_fft));
    std::vector<std::complex<double>> dspec(static_cast<size_t>(n_bins));
    for (int t = 0; t < n.grad.rows; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const long long start = static_cast<long long>(t) * hop - pad;
      for (int i = 0; i < win; ++i) {
        const long long j = start + i;
        const int src = dsp::reflect_index(j, len);
        buf[static_cast<size_t>(i)] =
            wav->val.v[static_cast<size_t>(src)] * window[static_cast<size_t>(i)];
      }
      std::vector<std::complex<double>> spec = fft::rfft(buf);
      for (int k = 0; k < n_bins; ++k) {
        const double mag = std::abs(spec[static_cast<size_t>(k)]);
        std::complex<double> d =
            mag > 1e-12
                ? spec[static_cast<size_t>(k)] * (n.grad.at(t, k) / mag)
                : std::complex<double>(0.0, 0.0);
        // The c2r transform double-counts interior bins of a one-sided
        // spectrum; halve them so the adjoint is exact.
        if (k > 0 && k < n_bins - 1) d *= 0.5;
        dspec[static_cast<size_t>(k)] = d;
      }
      std::vector<double> dbuf = fft::irfft(dspec, n_fft);
      for (int i = 0; i < win; ++i) {
        const long long j = start + i;
        const int src = dsp::reflect_index(j, len);
        wav->grad.v[static_cast<size_t>(src)] +=
            dbuf[static_cast<size_t>(i)] * window[static_cast<size_t>(i)] * n_fft;
      }
    }
  };
  return node;
}

NodeP Graph::dropout(NodeP a, double p, uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw ParamError("dropout: p must be in [0, 1)");
  if (p == 0.0) return a;
  Rng rng(seed);
  auto mask = std::make_shared<std::vector<double>>(a->val.size());
  Mat out = a->val;
  const double keep = 1.0 / (1.0 - p);
  for (size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() >= p ? keep : 0.0;
    out.v[i] *= (*mask)[i];
  }
  return make(std::move(out), {a}, [a, mask](Node& n) {
    a->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) {
      a->grad.v[i] += n.grad.v[i] * (*mask)[i];
    }
  });
}

void Graph::backward(NodeP loss) {
  if (loss->val.rows != 1 || loss->val.cols != 1) {
    throw ParamError("backward: loss must be 1 x 1");
  }
  loss->ensure_grad();
  loss->grad.at(0, 0) = 1.0;

  std::vector<NodeP> order;
  std::unordered_set<const Node*> seen;
  std::vector<NodeP> stack{loss};
  seen.insert(loss);
  while (!stack.empty()) {
    NodeP n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (NodeP p : n->parents) {
      if (p != nullptr && p->requires_grad && seen.insert(p).second) {
        stack.push_back(p);
      }
    }
  }
  std::sort(order.begin(), order.end(),
            [](NodeP a, NodeP b) { return a->id > b->id; });
  for (NodeP n : order) {
    if (n->requires_grad && n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace crossvox::nn
