/* Copyright (c) 2026 The evframe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */


#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evframe/model.h"
#include "evframe/tensor.h"

namespace evframe {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // Throws InvalidConfig unless lr >= 0 and both betas lie in [0, 1).
  void Validate() const;
};

// Moments are stored in parameter order and mirror parameter shapes.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

AdamState MakeAdamState(std::span<const ParamRef> params);

// One bias-corrected Adam update over all parameters using their gradients.
// Throws ShapeMismatch when the state does not mirror the parameters.
void AdamStep(std::span<const ParamRef> params, AdamState& state, const AdamConfig& config);

}  // namespace evframe
