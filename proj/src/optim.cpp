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

#include "crossvox/nn/optim.h"

#include <cmath>

#include "crossvox/common.h"

namespace crossvox::nn {

Adam::Adam(ParamRegistry& reg, double lr, double beta1, double beta2,
           double eps)
    : reg_(reg), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : reg_.params()) {
    m_.emplace_back(p->value().rows, p->value().cols);
    v_.emplace_back(p->value().rows, p->value().cols);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < reg_.params().size(); ++i) {
    Param& p = *reg_.params()[i];
    Mat& val = p.value();
    Mat& grad = p.grad();
    Mat& m = m_[i];
    Mat& v = v_[i];
    for (size_t j = 0; j < val.size(); ++j) {
      const double g = grad.v[j];
      m.v[j] = beta1_ * m.v[j] + (1.0 - beta1_) * g;
      v.v[j] = beta2_ * v.v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m.v[j] / bc1;
      const double vhat = v.v[j] / bc2;
      val.v[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::vector<std::pair<std::string, Mat>> Adam::export_state() const {
  std::vector<std::pair<std::string, Mat>> out;
  for (size_t i = 0; i < reg_.params().size(); ++i) {
    out.emplace_back("m." + reg_.params()[i]->name(), m_[i]);
    out.emplace_back("v." + reg_.params()[i]->name(), v_[i]);
  }
  return out;
}

void Adam::import_state(
    const std::vector<std::pair<std::string, Mat>>& tensors, int64_t steps_done) {
  t_ = steps_done;
  for (size_t i = 0; i < reg_.params().size(); ++i) {
    const std::string& name = reg_.params()[i]->name();
    bool got_m = false, got_v = false;
    for (const auto& [tname, mat] : tensors) {
      if (tname == "m." + name) {
        if (!mat.same_shape(m_[i])) throw FormatError("adam state: shape mismatch for " + tname);
        m_[i] = mat;
        got_m = true;
      } else if (tname == "v." + name) {
        if (!mat.same_shape(v_[i])) throw FormatError("adam state: shape mismatch for " + tname);
        v_[i] = mat;
        got_v = true;
      }
    }
    if (!got_m || !got_v) {
      throw FormatError("adam state: missing moments for parameter " + name);
    }
  }
}

}  // namespace crossvox::nn
