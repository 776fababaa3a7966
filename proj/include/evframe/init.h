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

#include <cmath>
#include <cstddef>
#include <random>

#include "evframe/tensor.h"

namespace evframe {

inline void UniformFill(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
}

// He/Kaiming uniform for ReLU networks: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
inline void KaimingUniform(Tensor& t, std::size_t fan_in, std::mt19937_64& rng) {
  UniformFill(t, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

}  // namespace evframe
