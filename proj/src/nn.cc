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


#include "evframe/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evframe/error.h"
#include "evframe/parallel.h"
#include "gemm.h"

namespace evframe::nn {

namespace {

// Fixed partition of the batch for reductions. Depends only on the batch
// size so gradients are bit-identical for any worker count.
constexpr std::size_t kReductionChunks = 8;

struct ChunkRange {
  std::size_t begin;
  std::size_t end;
};

std::vector<ChunkRange> BatchChunks(std::size_t batch) {
  const std::size_t chunks = std::min(batch, kReductionChunks);
  std::vector<ChunkRange> out;
  for (std::size_t c = 0; c < chunks; ++c) {
    out.push_back({batch * c / chunks, batch * (c + 1) / chunks});
  }
  return out;
}

struct ConvGeometry {
  std::size_t channels, height, width, kernel, out_h, out_w;
  Conv2dSpec spec;
  std::size_t patch() const { return channels * kernel * kernel; }
  std::size_t out_plane() const { return out_h * out_w; }
};

void Im2Col(const double* image, const ConvGeometry& g, double* col) {
  const long pad = static_cast<long>(g.spec.padding);
  const long height = static_cast<long>(g.height);
  const long width = static_cast<long>(g.width);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        double* row = col + ((c * g.kernel + kh) * g.kernel + kw) * g.out_plane();
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.spec.stride + kh) - pad;
          double* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= height) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const double* src = image + (c * g.height + static_cast<std::size_t>(ih)) * g.width;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.spec.stride + kw) - pad;
            dst[ow] = (iw < 0 || iw >= width) ? 0.0 : src[iw];
          }
        }
      }
    }
  }
}

void Col2Im(const double* col, const ConvGeometry& g, double* image) {
  const long pad = static_cast<long>(g.spec.padding);
  const long height = static_cast<long>(g.height);
  const long width = static_cast<long>(g.width);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        const double* row = col + ((c * g.kernel + kh) * g.kernel + kw) * g.out_plane();
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.spec.stride + kh) - pad;
          if (ih < 0 || ih >= height) continue;
          double* dst = image + (c * g.height + static_cast<std::size_t>(ih)) * g.width;
          const double* src = row + oh * g.out_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.spec.stride + kw) - pad;
            if (iw >= 0 && iw < width) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

ConvGeometry CheckConv(const Tensor& x, const Tensor& weight, const Conv2dSpec& spec) {
  x.RequireRank(4, "conv2d input");
  weight.RequireRank(4, "conv2d weight");
  if (weight.dim(1) != x.dim(1) || weight.dim(2) != weight.dim(3)) {
    throw Error(ErrorKind::kShapeMismatch, "conv2d weight " + ShapeToString(weight.shape()) +
                                               " incompatible with input " +
                                               ShapeToString(x.shape()));
  }
  if (spec.stride == 0) throw Error(ErrorKind::kInvalidArgument, "conv2d stride must be positive");
  ConvGeometry g{x.dim(1), x.dim(2), x.dim(3), weight.dim(2), 0, 0, spec};
  g.out_h = ConvOutputSize(g.height, g.kernel, spec);
  g.out_w = ConvOutputSize(g.width, g.kernel, spec);
  return g;
}

}  // namespace

std::size_t ConvOutputSize(std::size_t input, std::size_t kernel, const Conv2dSpec& spec) {
  const std::size_t padded = input + 2 * spec.padding;
  if (padded < kernel) {
    throw Error(ErrorKind::kShapeMismatch, "kernel " + std::to_string(kernel) +
                                               " larger than padded input " +
                                               std::to_string(padded));
  }
  return (padded - kernel) / spec.stride + 1;
}

Tensor Conv2dForward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     const Conv2dSpec& spec) {
  const ConvGeometry g = CheckConv(x, weight, spec);
  const std::size_t batch = x.dim(0);
  const std::size_t out_c = weight.dim(0);
  if (!bias.empty()) bias.RequireShape({out_c}, "conv2d bias");
  Tensor y({batch, out_c, g.out_h, g.out_w});
  const std::size_t in_stride = g.channels * g.height * g.width;
  const std::size_t out_stride = out_c * g.out_plane();
  ParallelFor(batch, [&](std::size_t n) {
    std::vector<double> col(g.patch() * g.out_plane());
    Im2Col(x.data() + n * in_stride, g, col.data());
    double* out = y.data() + n * out_stride;
    if (!bias.empty()) {
      for (std::size_t o = 0; o < out_c; ++o) {
        std::fill(out + o * g.out_plane(), out + (o + 1) * g.out_plane(), bias[o]);
      }
    }
    detail::GemmNN(out_c, g.out_plane(), g.patch(), weight.data(), col.data(), out);
  });
  CheckFinite(y, "conv2d");
  return y;
}

Conv2dGrads Conv2dBackward(const Tensor& x, const Tensor& weight, bool has_bias,
                           const Tensor& dy, const Conv2dSpec& spec) {
  const ConvGeometry g = CheckConv(x, weight, spec);
  const std::size_t batch = x.dim(0);
  const std::size_t out_c = weight.dim(0);
  dy.RequireShape({batch, out_c, g.out_h, g.out_w}, "conv2d output gradient");

  Conv2dGrads grads;
  grads.dx = Tensor::ZerosLike(x);
  const std::size_t in_stride = g.channels * g.height * g.width;
  const std::size_t out_stride = out_c * g.out_plane();
  const auto chunks = BatchChunks(batch);
  std::vector<Tensor> dweight_parts(chunks.size(), Tensor::ZerosLike(weight));
  std::vector<std::vector<double>> dbias_parts(chunks.size(), std::vector<double>(out_c, 0.0));

  ParallelFor(chunks.size(), [&](std::size_t c) {
    std::vector<double> col(g.patch() * g.out_plane());
    std::vector<double> dcol(col.size());
    for (std::size_t n = chunks[c].begin; n < chunks[c].end; ++n) {
      const double* dyn = dy.data() + n * out_stride;
      Im2Col(x.data() + n * in_stride, g, col.data());
      detail::GemmNT(out_c, g.patch(), g.out_plane(), dyn, col.data(), dweight_parts[c].data());
      std::fill(dcol.begin(), dcol.end(), 0.0);
      detail::GemmTN(g.patch(), g.out_plane(), out_c, weight.data(), dyn, dcol.data());
      Col2Im(dcol.data(), g, grads.dx.data() + n * in_stride);
      if (has_bias) {
        for (std::size_t o = 0; o < out_c; ++o) {
          const double* plane = dyn + o * g.out_plane();
          double acc = 0.0;
          for (std::size_t i = 0; i < g.out_plane(); ++i) acc += plane[i];
          dbias_parts[c][o] += acc;
        }
      }
    }
  });

  grads.dweight = Tensor::ZerosLike(weight);
  for (const auto& part : dweight_parts) grads.dweight += part;
  if (has_bias) {
    grads.dbias = Tensor({out_c});
    for (const auto& part : dbias_parts) {
      for (std::size_t o = 0; o < out_c; ++o) grads.dbias[o] += part[o];
    }
  }
  CheckFinite(grads.dx, "conv2d backward");
  return grads;
}

Tensor BatchNormForward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                        const Tensor& running_mean, const Tensor& running_var,
                        BatchNormMode mode, double eps, BatchNormCache* cache) {
  x.RequireRank(4, "batchnorm input");
  const std::size_t batch = x.dim(0), channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  const std::size_t count = batch * plane;
  gamma.RequireShape({channels}, "batchnorm gamma");
  beta.RequireShape({channels}, "batchnorm beta");
  running_mean.RequireShape({channels}, "batchnorm running mean");
  running_var.RequireShape({channels}, "batchnorm running var");

  std::vector<double> mean(channels), var(channels), inv_std(channels);
  if (mode == BatchNormMode::kTrain) {
    if (count < 2) {
      throw Error(ErrorKind::kDegenerateBatch,
                  "batch statistics need at least 2 values per channel, got " +
                      std::to_string(count));
    }
    for (std::size_t c = 0; c < channels; ++c) {
      double sum = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      }
      mean[c] = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* p = x.data() + (n * channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - mean[c];
          sq += d * d;
        }
      }
      var[c] = sq / static_cast<double>(count);
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = running_mean[c];
      var[c] = running_var[c];
    }
  }
  for (std::size_t c = 0; c < channels; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);

  Tensor y = Tensor::ZerosLike(x);
  Tensor x_hat = Tensor::ZerosLike(x);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const double h = (x[base + i] - mean[c]) * inv_std[c];
        x_hat[base + i] = h;
        y[base + i] = gamma[c] * h + beta[c];
      }
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->x_hat = std::move(x_hat);
    cache->mean = std::move(mean);
    cache->var = std::move(var);
    cache->inv_std = std::move(inv_std);
    cache->reduce_count = count;
  }
  CheckFinite(y, "batchnorm2d");
  return y;
}

void UpdateRunningStats(const BatchNormCache& cache, double momentum, Tensor& running_mean,
                        Tensor& running_var) {
  if (cache.mode != BatchNormMode::kTrain) return;
  const double correction =
      static_cast<double>(cache.reduce_count) / static_cast<double>(cache.reduce_count - 1);
  for (std::size_t c = 0; c < cache.mean.size(); ++c) {
    running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * cache.mean[c];
    running_var[c] = momentum * running_var[c] + (1.0 - momentum) * cache.var[c] * correction;
  }
}

BatchNormGrads BatchNormBackward(const Tensor& dy, const Tensor& gamma,
                                 const BatchNormCache& cache) {
  dy.RequireShape(cache.x_hat.shape(), "batchnorm output gradient");
  const std::size_t batch = dy.dim(0), channels = dy.dim(1);
  const std::size_t plane = dy.dim(2) * dy.dim(3);
  const double count = static_cast<double>(cache.reduce_count);

  BatchNormGrads grads;
  grads.dx = Tensor::ZerosLike(dy);
  grads.dgamma = Tensor({channels});
  grads.dbeta = Tensor({channels});
  for (std::size_t c = 0; c < channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy[base + i];
        sum_dy_xhat += dy[base + i] * cache.x_hat[base + i];
      }
    }
    grads.dgamma[c] = sum_dy_xhat;
    grads.dbeta[c] = sum_dy;
    const double scale = gamma[c] * cache.inv_std[c];
    for (std::size_t n = 0; n < batch; ++n) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        if (cache.mode == BatchNormMode::kTrain) {
          grads.dx[base + i] =
              scale * (dy[base + i] - sum_dy / count - cache.x_hat[base + i] * sum_dy_xhat / count);
        } else {
          grads.dx[base + i] = scale * dy[base + i];
        }
      }
    }
  }
  CheckFinite(grads.dx, "batchnorm2d backward");
  return grads;
}

Tensor Relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor ReluBackward(const Tensor& x, const Tensor& dy) {
  dy.RequireShape(x.shape(), "relu output gradient");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

double Sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Tensor Sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = Sigmoid(v);
  return y;
}

Tensor SigmoidBackward(const Tensor& y, const Tensor& dy) {
  dy.RequireShape(y.shape(), "sigmoid output gradient");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
  return dx;
}

PoolResult MaxPool2dForward(const Tensor& x, std::size_t kernel, std::size_t stride) {
  x.RequireRank(4, "maxpool input");
  if (kernel == 0 || stride == 0) {
    throw Error(ErrorKind::kInvalidArgument, "maxpool kernel and stride must be positive");
  }
  const std::size_t batch = x.dim(0), channels = x.dim(1), height = x.dim(2), width = x.dim(3);
  if (height < kernel || width < kernel) {
    throw Error(ErrorKind::kShapeMismatch, "maxpool window " + std::to_string(kernel) +
                                               " larger than input " + ShapeToString(x.shape()));
  }
  const std::size_t out_h = (height - kernel) / stride + 1;
  const std::size_t out_w = (width - kernel) / stride + 1;
  PoolResult r{Tensor({batch, channels, out_h, out_w}), {}};
  r.argmax.resize(r.y.size());
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const std::size_t base = nc * height * width;
    for (std::size_t oh = 0; oh < out_h; ++oh) {
      for (std::size_t ow = 0; ow < out_w; ++ow, ++o) {
        std::size_t best = base + (oh * stride) * width + ow * stride;
        for (std::size_t kh = 0; kh < kernel; ++kh) {
          for (std::size_t kw = 0; kw < kernel; ++kw) {
            const std::size_t idx = base + (oh * stride + kh) * width + ow * stride + kw;
            if (x[idx] > x[best]) best = idx;
          }
        }
        r.y[o] = x[best];
        r.argmax[o] = best;
      }
    }
  }
  return r;
}

Tensor MaxPoolBackward(const Shape& input_shape, std::span<const std::size_t> argmax,
                       const Tensor& dy) {
  if (argmax.size() != dy.size()) {
    throw Error(ErrorKind::kShapeMismatch, "pool gradient does not match argmax table");
  }
  Tensor dx(input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax[i]] += dy[i];
  return dx;
}

Tensor GlobalAvgPoolForward(const Tensor& x) {
  x.RequireRank(4, "global pool input");
  const std::size_t plane = x.dim(2) * x.dim(3);
  if (plane == 0) throw Error(ErrorKind::kShapeMismatch, "global pool over empty plane");
  Tensor y({x.dim(0), x.dim(1), 1, 1});
  for (std::size_t nc = 0; nc < y.size(); ++nc) {
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += x[nc * plane + i];
    y[nc] = sum / static_cast<double>(plane);
  }
  return y;
}

Tensor GlobalAvgPoolBackward(const Shape& input_shape, const Tensor& dy) {
  Tensor dx(input_shape);
  const std::size_t plane = input_shape[2] * input_shape[3];
  if (dy.size() != input_shape[0] * input_shape[1]) {
    throw Error(ErrorKind::kShapeMismatch, "global pool gradient shape");
  }
  for (std::size_t nc = 0; nc < dy.size(); ++nc) {
    const double g = dy[nc] / static_cast<double>(plane);
    for (std::size_t i = 0; i < plane; ++i) dx[nc * plane + i] = g;
  }
  return dx;
}

PoolResult GlobalMaxPoolForward(const Tensor& x) {
  x.RequireRank(4, "global pool input");
  const std::size_t plane = x.dim(2) * x.dim(3);
  if (plane == 0) throw Error(ErrorKind::kShapeMismatch, "global pool over empty plane");
  PoolResult r{Tensor({x.dim(0), x.dim(1), 1, 1}), {}};
  r.argmax.resize(r.y.size());
  for (std::size_t nc = 0; nc < r.y.size(); ++nc) {
    std::size_t best = nc * plane;
    for (std::size_t i = 1; i < plane; ++i) {
      if (x[nc * plane + i] > x[best]) best = nc * plane + i;
    }
    r.y[nc] = x[best];
    r.argmax[nc] = best;
  }
  return r;
}

Tensor LinearForward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  x.RequireRank(2, "linear input");
  weight.RequireRank(2, "linear weight");
  if (weight.dim(1) != x.dim(1)) {
    throw Error(ErrorKind::kShapeMismatch, "linear weight " + ShapeToString(weight.shape()) +
                                               " incompatible with input " +
                                               ShapeToString(x.shape()));
  }
  const std::size_t batch = x.dim(0), out_f = weight.dim(0), in_f = weight.dim(1);
  Tensor y({batch, out_f});
  if (!bias.empty()) {
    bias.RequireShape({out_f}, "linear bias");
    for (std::size_t n = 0; n < batch; ++n) {
      std::copy(bias.data(), bias.data() + out_f, y.data() + n * out_f);
    }
  }
  detail::GemmNT(batch, out_f, in_f, x.data(), weight.data(), y.data());
  CheckFinite(y, "linear");
  return y;
}

LinearGrads LinearBackward(const Tensor& x, const Tensor& weight, const Tensor& dy) {
  const std::size_t batch = x.dim(0), out_f = weight.dim(0), in_f = weight.dim(1);
  dy.RequireShape({batch, out_f}, "linear output gradient");
  LinearGrads g{Tensor::ZerosLike(x), Tensor::ZerosLike(weight), Tensor({out_f})};
  detail::GemmNN(batch, in_f, out_f, dy.data(), weight.data(), g.dx.data());
  detail::GemmTN(out_f, in_f, batch, dy.data(), x.data(), g.dweight.data());
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < out_f; ++o) g.dbias[o] += dy[n * out_f + o];
  }
  return g;
}

LossResult SoftmaxCrossEntropy(const Tensor& logits, std::span<const std::int32_t> labels) {
  logits.RequireRank(2, "logits");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw Error(ErrorKind::kShapeMismatch, "got " + std::to_string(labels.size()) +
                                               " labels for batch of " + std::to_string(batch));
  }
  if (batch == 0) throw Error(ErrorKind::kShapeMismatch, "empty batch");
  LossResult r{0.0, Tensor::ZerosLike(logits)};
  for (std::size_t n = 0; n < batch; ++n) {
    const std::int32_t label = labels[n];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw Error(ErrorKind::kLabelOutOfRange, "label " + std::to_string(label) +
                                                   " outside [0, " + std::to_string(classes) + ")");
    }
    const double* row = logits.data() + n * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - peak);
    const double log_denom = std::log(denom);
    r.loss += -(row[label] - peak - log_denom);
    double* grad = r.grad.data() + n * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      grad[k] = std::exp(row[k] - peak - log_denom) / static_cast<double>(batch);
    }
    grad[label] -= 1.0 / static_cast<double>(batch);
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

}  // namespace evframe::nn
