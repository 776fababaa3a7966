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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evframe/attention.h"
#include "evframe/tensor.h"
#include "json.hpp"

namespace evframe {

enum class HeadKind {
  kGapLinear,   // global average pool -> one linear layer
  kFlattenMlp,  // flatten -> (linear -> relu) per hidden width -> linear
};

enum class FrameFusion {
  kChannels,   // the sample tensor is fed as one multi-channel image
  kLogitMean,  // the sample holds `frames` images; logits are averaged
};

HeadKind ParseHeadKind(std::string_view name);        // gap_linear | flatten_mlp
FrameFusion ParseFrameFusion(std::string_view name);  // channels | logit_mean
std::string_view HeadKindName(HeadKind kind);
std::string_view FrameFusionName(FrameFusion fusion);

// VGG-style network: per stage, `convs_per_block` x (3x3 conv -> batchnorm
// -> relu), an optional CBAM block, then 2x2 max pooling.
struct ModelConfig {
  std::size_t input_channels = 2;  // channels of one image fed to the first conv
  std::size_t input_height = 128;
  std::size_t input_width = 128;
  std::vector<std::size_t> stage_channels{64, 128, 256, 512, 512};
  std::size_t convs_per_block = 2;
  bool batch_norm = true;
  bool conv_bias = false;
  std::vector<std::size_t> cbam_stages{0, 1, 2, 3, 4};
  attention::CbamOptions cbam;
  std::size_t num_classes = 10;
  HeadKind head = HeadKind::kGapLinear;
  std::vector<std::size_t> classifier_hidden;
  FrameFusion fusion = FrameFusion::kChannels;
  std::size_t frames = 1;

  // Per-sample input shape: [frames * input_channels, H, W] for kLogitMean,
  // [input_channels, H, W] otherwise.
  Shape SampleShape() const;
  bool HasCbam(std::size_t stage) const;
  // Spatial size after `stages` poolings, floor(size / 2^stages).
  std::size_t SpatialAfter(std::size_t size, std::size_t stages) const;

  // Throws InvalidConfig naming the offending field.
  void Validate() const;
};

nlohmann::json ModelConfigToJson(const ModelConfig& config);
// Rejects unknown keys; absent keys keep their defaults. `conv_bias`
// defaults to !batch_norm when absent.
ModelConfig ModelConfigFromJson(const nlohmann::json& json, const std::string& path = "model");

// FNV-1a 64 over the canonical JSON serialization.
std::uint64_t ModelConfigDigest(const ModelConfig& config);

// Three-channel VGG with conv biases, no batchnorm, no attention and the
// classic flatten -> 4096 -> 4096 -> K head.
ModelConfig VggOriginalPreset(std::size_t height, std::size_t width, std::size_t num_classes);

}  // namespace evframe
