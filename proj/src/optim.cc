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


#include "evframe/optim.h"

#include <cmath>
#include <string>

#include "evframe/error.h"

namespace evframe {

void AdamConfig::Validate() const {
  auto fail = [](const std::string& field, const std::string& message) {
    throw Error(ErrorKind::kInvalidConfig, "train." + field + ": " + message);
  };
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr", "must be a finite value >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "must lie in [0, 1)");
  if (!(eps > 0.0)) fail("eps", "must be positive");
}

AdamState MakeAdamState(std::span<const ParamRef> params) {
  AdamState state;
  for (const ParamRef& p : params) {
    state.first_moment.push_back(Tensor::ZerosLike(*p.value));
    state.second_moment.push_back(Tensor::ZerosLike(*p.value));
  }
  return state;
}

void AdamStep(std::span<const ParamRef> params, AdamState& state, const AdamConfig& config) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw Error(ErrorKind::kShapeMismatch, "optimizer state has " +
                                               std::to_string(state.first_moment.size()) +
                                               " moments for " + std::to_string(params.size()) +
                                               " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params[i].name;
    params[i].grad->RequireShape(params[i].value->shape(), name.c_str());
    state.first_moment[i].RequireShape(params[i].value->shape(), name.c_str());
    state.second_moment[i].RequireShape(params[i].value->shape(), name.c_str());
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* w = params[i].value->data();
    const double* g = params[i].grad->data();
    double* m = state.first_moment[i].data();
    double* v = state.second_moment[i].data();
    const std::size_t n = params[i].value->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      w[j] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace evframe
