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

#ifndef CROSSVOX_NN_OPTIM_H_
#define CROSSVOX_NN_OPTIM_H_

#include <string>
#include <vector>

#include "crossvox/nn/layers.h"

namespace crossvox::nn {

// Adam over a ParamRegistry. Moment buffers are addressed by parameter name
// so optimizer state can be checkpointed and restored for exact resume.
class Adam {
 public:
  Adam(ParamRegistry& reg, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step();
  int64_t steps_done() const { return t_; }

  // State export/import for resume. Tensors are named m.<param> / v.<param>.
  std::vector<std::pair<std::string, Mat>> export_state() const;
  void import_state(const std::vector<std::pair<std::string, Mat>>& tensors,
                    int64_t steps_done);

 private:
  ParamRegistry& reg_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace crossvox::nn

#endif  // CROSSVOX_NN_OPTIM_H_
