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
#include <vector>

#include "evframe/attention.h"
#include "evframe/model_config.h"
#include "evframe/nn.h"
#include "evframe/tensor.h"

namespace evframe {

enum class Phase { kTrain, kEval };

// Named view of a learnable tensor and its gradient accumulator.
struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

// Named view of a non-learnable state tensor (batchnorm running stats).
struct BufferRef {
  std::string name;
  Tensor* value;
};

class Model {
 public:
  // Zero-initialized parameters; see BuildModel for seeded initialization.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  // x is N x SampleShape(). Train phase normalizes with batch statistics and
  // updates the batchnorm running statistics; eval uses the running ones.
  // Both phases keep what Backward needs.
  Tensor Forward(const Tensor& x, Phase phase);

  // Accumulates parameter gradients for the latest Forward and returns
  // d loss / d x.
  Tensor Backward(const Tensor& d_logits);

  // Hash of every discrete choice made by the latest Forward: relu activity,
  // pooling and attention argmax positions. Two forwards with equal
  // signatures ran on the same smooth piece of the network function.
  std::uint64_t RegionSignature() const;

  void ZeroGrad();
  std::vector<ParamRef> Parameters();
  std::vector<BufferRef> Buffers();
  std::size_t ParameterCount() const;

 private:
  struct ConvUnit {
    Tensor weight, bias, dweight, dbias;
    Tensor gamma, beta, dgamma, dbeta;
    Tensor running_mean, running_var;
    Tensor input, pre_activation;
    nn::BatchNormCache bn_cache;
  };
  struct Stage {
    std::vector<ConvUnit> convs;
    bool has_cbam = false;
    attention::CbamParams cbam, dcbam;
    attention::CbamCache cbam_cache;
    Shape pool_input_shape;
    std::vector<std::size_t> pool_argmax;
  };
  struct DenseUnit {
    Tensor weight, bias, dweight, dbias;
    Tensor input, pre_activation;
    bool relu = false;
  };

  void InitParameters(std::uint64_t seed);
  friend Model BuildModel(const ModelConfig& config, std::uint64_t seed);

  ModelConfig config_;
  std::vector<Stage> stages_;
  std::vector<DenseUnit> head_;
  Shape features_shape_;  // shape entering the head, cached for backward
  std::size_t batch_ = 0;
};

// Throws InvalidConfig when the configuration is unusable (e.g. the spatial
// size collapses below 1x1). Weights: Kaiming-uniform fan-in for convs and
// attention, N(0, 0.01^2)-scale uniform for the classifier, batchnorm
// gamma = 1 / beta = 0, all biases 0.
Model BuildModel(const ModelConfig& config, std::uint64_t seed);

// ---- accounting -----------------------------------------------------------

struct LayerCost {
  std::string name;
  std::string kind;
  Shape output;           // per image, C x H x W or F
  std::uint64_t params = 0;
  std::uint64_t flops = 0;  // per sample
};

// Analytic per-layer parameter and FLOP table for one sample. Conventions:
// 1 MAC = 2 FLOPs; bias adds, batchnorm scale+shift (2/elem), relu, pooling
// window reads, sigmoid, gate products and descriptor reductions count 1 op
// per element. kLogitMean multiplies per-image costs by `frames`.
std::vector<LayerCost> ProfileModel(const ModelConfig& config);

// Exact element count of the model's learnable tensors.
std::uint64_t CountParams(Model& model);

// Per-sample MFLOPs for the given sample shape (C x H x W).
double CountMegaFlops(const Model& model, const Shape& sample_shape);

std::string FormatCostTable(const std::vector<LayerCost>& costs);
// Per-layer comparison aligned by layer name, plus totals and relative change.
std::string FormatCostDelta(const std::vector<LayerCost>& baseline,
                            const std::vector<LayerCost>& candidate,
                            const std::string& baseline_name, const std::string& candidate_name);

}  // namespace evframe
