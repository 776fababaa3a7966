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


#include "evframe/attention.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evframe/error.h"
#include "evframe/init.h"
#include "evframe/nn.h"

namespace evframe::attention {

namespace {

// Sigmoid kept inside the open interval (0, 1). In double precision the
// logistic rounds to exactly 1 beyond about 37, which would let a gate pass
// its input through unattenuated.
Tensor Gate(const Tensor& logits) {
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double high = std::nextafter(1.0, 0.0);
  Tensor g = nn::Sigmoid(logits);
  for (double& v : g.values()) v = std::clamp(v, kLow, high);
  return g;
}

Tensor Flatten2d(const Tensor& t) { return t.Reshaped({t.dim(0), t.size() / t.dim(0)}); }

struct MlpTrace {
  Tensor pre;
  Tensor hidden;
  Tensor out;
};

MlpTrace RunMlp(const Tensor& input, const ChannelAttentionParams& p) {
  MlpTrace t;
  t.pre = nn::LinearForward(input, p.fc1_weight, p.fc1_bias);
  t.hidden = nn::Relu(t.pre);
  t.out = nn::LinearForward(t.hidden, p.fc2_weight, p.fc2_bias);
  return t;
}

// Accumulates parameter gradients into `grads` and returns d input.
Tensor MlpBackward(const Tensor& input, const Tensor& pre, const Tensor& hidden,
                   const Tensor& d_out, const ChannelAttentionParams& p,
                   ChannelAttentionParams& grads) {
  nn::LinearGrads g2 = nn::LinearBackward(hidden, p.fc2_weight, d_out);
  const Tensor d_pre = nn::ReluBackward(pre, g2.dx);
  nn::LinearGrads g1 = nn::LinearBackward(input, p.fc1_weight, d_pre);
  grads.fc2_weight += g2.dweight;
  grads.fc2_bias += g2.dbias;
  grads.fc1_weight += g1.dweight;
  grads.fc1_bias += g1.dbias;
  return g1.dx;
}

void CheckChannelParams(const Tensor& x, const ChannelAttentionParams& p) {
  x.RequireRank(4, "channel attention input");
  const std::size_t channels = x.dim(1);
  const std::size_t hidden = p.fc1_weight.rank() == 2 ? p.fc1_weight.dim(0) : 0;
  p.fc1_weight.RequireShape({hidden, channels}, "channel attention fc1 weight");
  p.fc1_bias.RequireShape({hidden}, "channel attention fc1 bias");
  p.fc2_weight.RequireShape({channels, hidden}, "channel attention fc2 weight");
  p.fc2_bias.RequireShape({channels}, "channel attention fc2 bias");
}

}  // namespace

CbamOrder ParseCbamOrder(std::string_view name) {
  if (name == "cam_then_sam") return CbamOrder::kChannelFirst;
  if (name == "sam_then_cam") return CbamOrder::kSpatialFirst;
  throw Error(ErrorKind::kInvalidArgument, "unknown CBAM order '" + std::string(name) + "'");
}

std::string_view CbamOrderName(CbamOrder order) {
  return order == CbamOrder::kChannelFirst ? "cam_then_sam" : "sam_then_cam";
}

std::size_t HiddenWidth(std::size_t channels, std::size_t reduction) {
  if (reduction == 0) throw Error(ErrorKind::kInvalidArgument, "CBAM reduction must be positive");
  return std::max<std::size_t>(1, channels / reduction);
}

CbamParams MakeCbamParams(std::size_t channels, const CbamOptions& options) {
  if (options.kernel == 0 || options.kernel % 2 == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "spatial attention kernel must be odd, got " + std::to_string(options.kernel));
  }
  const std::size_t hidden = HiddenWidth(channels, options.reduction);
  CbamParams p;
  p.channel.fc1_weight = Tensor({hidden, channels});
  p.channel.fc1_bias = Tensor({hidden});
  p.channel.fc2_weight = Tensor({channels, hidden});
  p.channel.fc2_bias = Tensor({channels});
  p.spatial.conv_weight = Tensor({1, 2, options.kernel, options.kernel});
  p.spatial.conv_bias = Tensor({1});
  return p;
}

void InitCbamParams(CbamParams& params, std::mt19937_64& rng) {
  KaimingUniform(params.channel.fc1_weight, params.channel.fc1_weight.dim(1), rng);
  KaimingUniform(params.channel.fc2_weight, params.channel.fc2_weight.dim(1), rng);
  const std::size_t k = params.spatial.conv_weight.dim(2);
  KaimingUniform(params.spatial.conv_weight, 2 * k * k, rng);
  params.channel.fc1_bias.Fill(0.0);
  params.channel.fc2_bias.Fill(0.0);
  params.spatial.conv_bias.Fill(0.0);
}

std::size_t CbamParamCount(const CbamParams& p) {
  return p.channel.fc1_weight.size() + p.channel.fc1_bias.size() + p.channel.fc2_weight.size() +
         p.channel.fc2_bias.size() + p.spatial.conv_weight.size() + p.spatial.conv_bias.size();
}

GateOutput ChannelAttentionForward(const Tensor& x, const ChannelAttentionParams& params,
                                   ChannelAttentionCache* cache) {
  CheckChannelParams(x, params);
  const std::size_t batch = x.dim(0), channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);

  const Tensor avg = Flatten2d(nn::GlobalAvgPoolForward(x));
  nn::PoolResult max_pool = nn::GlobalMaxPoolForward(x);
  const Tensor max = Flatten2d(max_pool.y);
  MlpTrace via_avg = RunMlp(avg, params);
  MlpTrace via_max = RunMlp(max, params);

  Tensor logits = via_avg.out;
  logits += via_max.out;
  GateOutput out;
  out.gate = Gate(logits).Reshaped({batch, channels, 1, 1});
  out.refined = x;
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const double g = out.gate[nc];
    for (std::size_t i = 0; i < plane; ++i) out.refined[nc * plane + i] *= g;
  }
  if (cache) {
    cache->input = x;
    cache->avg = avg;
    cache->max = max;
    cache->max_argmax = std::move(max_pool.argmax);
    cache->hidden_avg_pre = std::move(via_avg.pre);
    cache->hidden_max_pre = std::move(via_max.pre);
    cache->hidden_avg = std::move(via_avg.hidden);
    cache->hidden_max = std::move(via_max.hidden);
    cache->gate = out.gate;
  }
  CheckFinite(out.refined, "channel attention");
  return out;
}

AttentionGrads<ChannelAttentionParams> ChannelAttentionBackward(
    const Tensor& d_refined, const ChannelAttentionParams& params,
    const ChannelAttentionCache& cache) {
  const Tensor& x = cache.input;
  d_refined.RequireShape(x.shape(), "channel attention output gradient");
  const std::size_t batch = x.dim(0), channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);

  AttentionGrads<ChannelAttentionParams> g;
  g.dx = d_refined;
  Tensor d_gate({batch, channels});
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const double gate = cache.gate[nc];
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      acc += d_refined[nc * plane + i] * x[nc * plane + i];
      g.dx[nc * plane + i] *= gate;
    }
    d_gate[nc] = acc;
  }
  const Tensor d_logits = nn::SigmoidBackward(Flatten2d(cache.gate), d_gate);

  g.dparams.fc1_weight = Tensor::ZerosLike(params.fc1_weight);
  g.dparams.fc1_bias = Tensor::ZerosLike(params.fc1_bias);
  g.dparams.fc2_weight = Tensor::ZerosLike(params.fc2_weight);
  g.dparams.fc2_bias = Tensor::ZerosLike(params.fc2_bias);
  const Tensor d_avg = MlpBackward(cache.avg, cache.hidden_avg_pre, cache.hidden_avg, d_logits,
                                   params, g.dparams);
  const Tensor d_max = MlpBackward(cache.max, cache.hidden_max_pre, cache.hidden_max, d_logits,
                                   params, g.dparams);
  g.dx += nn::GlobalAvgPoolBackward(x.shape(), d_avg);
  g.dx += nn::MaxPoolBackward(x.shape(), cache.max_argmax, d_max);
  return g;
}

GateOutput SpatialAttentionForward(const Tensor& x, const SpatialAttentionParams& params,
                                   SpatialAttentionCache* cache) {
  x.RequireRank(4, "spatial attention input");
  params.conv_weight.RequireRank(4, "spatial attention weight");
  const std::size_t k = params.conv_weight.dim(2);
  params.conv_weight.RequireShape({1, 2, k, k}, "spatial attention weight");
  params.conv_bias.RequireShape({1}, "spatial attention bias");
  if (k % 2 == 0) {
    throw Error(ErrorKind::kShapeMismatch, "spatial attention kernel must be odd to keep shape");
  }
  const std::size_t batch = x.dim(0), channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);

  Tensor descriptor({batch, 2, x.dim(2), x.dim(3)});
  std::vector<std::size_t> max_channel(batch * plane, 0);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* base = x.data() + n * channels * plane;
    double* mean_map = descriptor.data() + n * 2 * plane;
    double* max_map = mean_map + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      double sum = 0.0;
      double best = base[i];
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = base[c * plane + i];
        sum += v;
        if (v > best) {
          best = v;
          best_c = c;
        }
      }
      mean_map[i] = sum / static_cast<double>(channels);
      max_map[i] = best;
      max_channel[n * plane + i] = best_c;
    }
  }

  const nn::Conv2dSpec spec{1, k / 2};
  const Tensor logits = nn::Conv2dForward(descriptor, params.conv_weight, params.conv_bias, spec);
  GateOutput out;
  out.gate = Gate(logits);
  out.refined = x;
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      double* dst = out.refined.data() + (n * channels + c) * plane;
      const double* gate = out.gate.data() + n * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] *= gate[i];
    }
  }
  if (cache) {
    cache->input = x;
    cache->descriptor = std::move(descriptor);
    cache->max_channel = std::move(max_channel);
    cache->gate = out.gate;
    cache->padding = spec.padding;
  }
  CheckFinite(out.refined, "spatial attention");
  return out;
}

AttentionGrads<SpatialAttentionParams> SpatialAttentionBackward(
    const Tensor& d_refined, const SpatialAttentionParams& params,
    const SpatialAttentionCache& cache) {
  const Tensor& x = cache.input;
  d_refined.RequireShape(x.shape(), "spatial attention output gradient");
  const std::size_t batch = x.dim(0), channels = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);

  AttentionGrads<SpatialAttentionParams> g;
  g.dx = Tensor::ZerosLike(x);
  Tensor d_gate(cache.gate.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* gate = cache.gate.data() + n * plane;
    double* dg = d_gate.data() + n * plane;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        dg[i] += d_refined[base + i] * x[base + i];
        g.dx[base + i] = d_refined[base + i] * gate[i];
      }
    }
  }
  const Tensor d_logits = nn::SigmoidBackward(cache.gate, d_gate);
  nn::Conv2dGrads conv = nn::Conv2dBackward(cache.descriptor, params.conv_weight, true, d_logits,
                                            {1, cache.padding});
  g.dparams.conv_weight = std::move(conv.dweight);
  g.dparams.conv_bias = std::move(conv.dbias);

  const double inv_channels = 1.0 / static_cast<double>(channels);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* d_mean = conv.dx.data() + n * 2 * plane;
    const double* d_max = d_mean + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      for (std::size_t c = 0; c < channels; ++c) {
        g.dx[(n * channels + c) * plane + i] += d_mean[i] * inv_channels;
      }
      g.dx[(n * channels + cache.max_channel[n * plane + i]) * plane + i] += d_max[i];
    }
  }
  return g;
}

Tensor CbamForward(const Tensor& x, const CbamParams& params, const CbamOptions& options,
                   CbamCache* cache) {
  ChannelAttentionCache* channel_cache = cache ? &cache->channel : nullptr;
  SpatialAttentionCache* spatial_cache = cache ? &cache->spatial : nullptr;
  Tensor y;
  if (options.order == CbamOrder::kChannelFirst) {
    GateOutput first = ChannelAttentionForward(x, params.channel, channel_cache);
    y = SpatialAttentionForward(first.refined, params.spatial, spatial_cache).refined;
  } else {
    GateOutput first = SpatialAttentionForward(x, params.spatial, spatial_cache);
    y = ChannelAttentionForward(first.refined, params.channel, channel_cache).refined;
  }
  if (options.residual) y += x;
  if (cache) {
    cache->order = options.order;
    cache->residual = options.residual;
  }
  return y;
}

AttentionGrads<CbamParams> CbamBackward(const Tensor& dy, const CbamParams& params,
                                        const CbamCache& cache) {
  AttentionGrads<CbamParams> g;
  if (cache.order == CbamOrder::kChannelFirst) {
    auto spatial = SpatialAttentionBackward(dy, params.spatial, cache.spatial);
    auto channel = ChannelAttentionBackward(spatial.dx, params.channel, cache.channel);
    g.dx = std::move(channel.dx);
    g.dparams.channel = std::move(channel.dparams);
    g.dparams.spatial = std::move(spatial.dparams);
  } else {
    auto channel = ChannelAttentionBackward(dy, params.channel, cache.channel);
    auto spatial = SpatialAttentionBackward(channel.dx, params.spatial, cache.spatial);
    g.dx = std::move(spatial.dx);
    g.dparams.channel = std::move(channel.dparams);
    g.dparams.spatial = std::move(spatial.dparams);
  }
  if (cache.residual) g.dx += dy;
  return g;
}

}  // namespace evframe::attention
