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

// Finite-difference cases shared by the unit tests and the acceptance gate.
// Each case builds random inputs from `seed`, contracts the op's output with
// a fixed random weighting (loss = sum(r * y)) and returns the worst relative
// error over inputs and parameters.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evframe/gradcheck.h"
#include "evframe/model.h"

namespace evframe::testing {

struct GradientCase {
  std::string name;
  double tolerance;
  std::function<GradCheckResult(std::uint64_t seed)> run;
};

// Step for end-to-end probes, used with Richardson extrapolation and the
// model's region signature.
inline constexpr double kModelProbeStep = 1e-3;
ProbeOptions ModelProbeOptions(const Model& model);

GradCheckResult CheckConv2d(std::uint64_t seed);
GradCheckResult CheckConv2dStrided(std::uint64_t seed);
GradCheckResult CheckBatchNormTrain(std::uint64_t seed);
GradCheckResult CheckBatchNormEval(std::uint64_t seed);
GradCheckResult CheckRelu(std::uint64_t seed);
GradCheckResult CheckSigmoid(std::uint64_t seed);
GradCheckResult CheckMaxPool(std::uint64_t seed);
GradCheckResult CheckGlobalAvgPool(std::uint64_t seed);
GradCheckResult CheckGlobalMaxPool(std::uint64_t seed);
GradCheckResult CheckLinear(std::uint64_t seed);
GradCheckResult CheckSoftmaxCrossEntropy(std::uint64_t seed);
GradCheckResult CheckChannelAttention(std::uint64_t seed);
GradCheckResult CheckSpatialAttention(std::uint64_t seed);
GradCheckResult CheckCbam(std::uint64_t seed);
GradCheckResult CheckCbamSpatialFirstResidual(std::uint64_t seed);
GradCheckResult CheckToyModel(std::uint64_t seed);
GradCheckResult CheckToyModelLogitMean(std::uint64_t seed);

// Every case with its tolerance: 1e-6 per kernel (1e-7 for relu and
// sigmoid), 1e-5 for attention blocks, 1e-4 for the end-to-end model.
const std::vector<GradientCase>& AllGradientCases();

}  // namespace evframe::testing
