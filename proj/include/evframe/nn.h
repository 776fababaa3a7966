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
#include <span>
#include <vector>

#include "evframe/tensor.h"

// Forward/backward kernels over NCHW tensors. Every backward takes the
// upstream gradient and returns gradients for the inputs and parameters.
namespace evframe::nn {

// ---- conv2d ---------------------------------------------------------------
// Cross-correlation (no kernel flip). weight is C_out x C_in x k x k, bias is
// C_out or empty for a bias-free convolution.

struct Conv2dSpec {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

std::size_t ConvOutputSize(std::size_t input, std::size_t kernel, const Conv2dSpec& spec);

Tensor Conv2dForward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     const Conv2dSpec& spec);

struct Conv2dGrads {
  Tensor dx;
  Tensor dweight;
  Tensor dbias;  // empty when the convolution has no bias
};

Conv2dGrads Conv2dBackward(const Tensor& x, const Tensor& weight, bool has_bias,
                           const Tensor& dy, const Conv2dSpec& spec);

// ---- batchnorm2d ----------------------------------------------------------

enum class BatchNormMode { kTrain, kEval };

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormCache {
  BatchNormMode mode = BatchNormMode::kTrain;
  Tensor x_hat;
  std::vector<double> mean;     // statistics used for normalization
  std::vector<double> var;      // biased in train mode
  std::vector<double> inv_std;
  std::size_t reduce_count = 0;  // N * H * W
};

// Train mode normalizes by batch statistics and throws DegenerateBatch when a
// channel has fewer than two values. Eval mode uses the running statistics.
Tensor BatchNormForward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        const Tensor& running_mean, const Tensor& running_var,
                        BatchNormMode mode, double eps, BatchNormCache* cache);

// running = momentum * running + (1 - momentum) * batch, with the unbiased
// batch variance.
void UpdateRunningStats(const BatchNormCache& cache, double momentum, Tensor& running_mean,
                        Tensor& running_var);

struct BatchNormGrads {
  Tensor dx;
  Tensor dgamma;
  Tensor dbeta;
};

BatchNormGrads BatchNormBackward(const Tensor& dy, const Tensor& gamma,
                                 const BatchNormCache& cache);

// ---- activations ----------------------------------------------------------

Tensor Relu(const Tensor& x);
Tensor ReluBackward(const Tensor& x, const Tensor& dy);
double Sigmoid(double v);
Tensor Sigmoid(const Tensor& x);
// Takes the forward output y = sigmoid(x).
Tensor SigmoidBackward(const Tensor& y, const Tensor& dy);

// ---- pooling --------------------------------------------------------------
// Windows that do not fit are dropped: output = (H - k) / stride + 1.
// Backward routes each gradient to the first (row-major) maximal element.

struct PoolResult {
  Tensor y;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

PoolResult MaxPool2dForward(const Tensor& x, std::size_t kernel, std::size_t stride);
Tensor MaxPoolBackward(const Shape& input_shape, std::span<const std::size_t> argmax,
                       const Tensor& dy);

Tensor GlobalAvgPoolForward(const Tensor& x);
Tensor GlobalAvgPoolBackward(const Shape& input_shape, const Tensor& dy);
PoolResult GlobalMaxPoolForward(const Tensor& x);

// ---- linear ---------------------------------------------------------------
// y = x * weight^T + bias with weight F_out x F_in.

Tensor LinearForward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct LinearGrads {
  Tensor dx;
  Tensor dweight;
  Tensor dbias;
};

LinearGrads LinearBackward(const Tensor& x, const Tensor& weight, const Tensor& dy);

// ---- loss -----------------------------------------------------------------

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits, already divided by the batch size
};

// Mean over the batch of -log softmax(logits)[label]. Throws LabelOutOfRange.
LossResult SoftmaxCrossEntropy(const Tensor& logits, std::span<const std::int32_t> labels);

}  // namespace evframe::nn
