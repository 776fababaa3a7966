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

#include <cstddef>
#include <random>
#include <string_view>
#include <vector>

#include "evframe/tensor.h"

// Convolutional block attention: a channel gate from a shared two-layer MLP
// over average- and max-pooled descriptors, and a spatial gate from a k x k
// convolution over channel-wise mean and max maps.
namespace evframe::attention {

enum class CbamOrder { kChannelFirst, kSpatialFirst };

CbamOrder ParseCbamOrder(std::string_view name);  // cam_then_sam | sam_then_cam
std::string_view CbamOrderName(CbamOrder order);

struct CbamOptions {
  std::size_t reduction = 16;
  std::size_t kernel = 7;
  CbamOrder order = CbamOrder::kChannelFirst;
  // Ablation switch: output F + cbam(F) instead of cbam(F).
  bool residual = false;
};

// max(1, floor(channels / reduction))
std::size_t HiddenWidth(std::size_t channels, std::size_t reduction);

// Shared MLP C -> hidden -> C with a ReLU between the two maps.
struct ChannelAttentionParams {
  Tensor fc1_weight;  // hidden x C
  Tensor fc1_bias;    // hidden
  Tensor fc2_weight;  // C x hidden
  Tensor fc2_bias;    // C
};

struct SpatialAttentionParams {
  Tensor conv_weight;  // 1 x 2 x k x k, input channels (mean, max)
  Tensor conv_bias;    // 1
};

struct CbamParams {
  ChannelAttentionParams channel;
  SpatialAttentionParams spatial;
};

// All-zero parameters with the shapes implied by `channels` and `options`.
CbamParams MakeCbamParams(std::size_t channels, const CbamOptions& options);
// Kaiming-uniform (fan-in) weights, zero biases.
void InitCbamParams(CbamParams& params, std::mt19937_64& rng);
std::size_t CbamParamCount(const CbamParams& params);

struct GateOutput {
  Tensor gate;     // N x C x 1 x 1 (channel) or N x 1 x H x W (spatial)
  Tensor refined;  // input times broadcast gate
};

struct ChannelAttentionCache {
  Tensor input;
  Tensor avg;  // N x C
  Tensor max;  // N x C
  std::vector<std::size_t> max_argmax;
  Tensor hidden_avg_pre, hidden_max_pre;
  Tensor hidden_avg, hidden_max;
  Tensor gate;
};

struct SpatialAttentionCache {
  Tensor input;
  Tensor descriptor;  // N x 2 x H x W
  std::vector<std::size_t> max_channel;
  Tensor gate;
  std::size_t padding = 0;
};

GateOutput ChannelAttentionForward(const Tensor& x, const ChannelAttentionParams& params,
                                   ChannelAttentionCache* cache = nullptr);
GateOutput SpatialAttentionForward(const Tensor& x, const SpatialAttentionParams& params,
                                   SpatialAttentionCache* cache = nullptr);

template <typename Params>
struct AttentionGrads {
  Tensor dx;
  Params dparams;
};

AttentionGrads<ChannelAttentionParams> ChannelAttentionBackward(
    const Tensor& d_refined, const ChannelAttentionParams& params,
    const ChannelAttentionCache& cache);
AttentionGrads<SpatialAttentionParams> SpatialAttentionBackward(
    const Tensor& d_refined, const SpatialAttentionParams& params,
    const SpatialAttentionCache& cache);

struct CbamCache {
  ChannelAttentionCache channel;
  SpatialAttentionCache spatial;
  CbamOrder order = CbamOrder::kChannelFirst;
  bool residual = false;
};

// Applies both gates in the configured order; output shape equals input shape.
Tensor CbamForward(const Tensor& x, const CbamParams& params, const CbamOptions& options,
                   CbamCache* cache = nullptr);
AttentionGrads<CbamParams> CbamBackward(const Tensor& dy, const CbamParams& params,
                                        const CbamCache& cache);

}  // namespace evframe::attention
