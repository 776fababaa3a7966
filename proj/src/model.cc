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


#include "evframe/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "evframe/error.h"
#include "evframe/init.h"

namespace evframe {

namespace {

constexpr std::size_t kConvKernel = 3;
constexpr nn::Conv2dSpec kConvSpec{1, 1};
constexpr std::size_t kPoolWindow = 2;
// Classifier output weights ~ std 0.01 so initial logits are near zero.
constexpr double kClassifierStd = 0.01;

std::string StageName(std::size_t s) { return "stage" + std::to_string(s + 1); }

void AddCbamGrads(attention::CbamParams& acc, const attention::CbamParams& g) {
  acc.channel.fc1_weight += g.channel.fc1_weight;
  acc.channel.fc1_bias += g.channel.fc1_bias;
  acc.channel.fc2_weight += g.channel.fc2_weight;
  acc.channel.fc2_bias += g.channel.fc2_bias;
  acc.spatial.conv_weight += g.spatial.conv_weight;
  acc.spatial.conv_bias += g.spatial.conv_bias;
}

}  // namespace

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.Validate();
  std::size_t in_c = config_.input_channels;
  for (std::size_t s = 0; s < config_.stage_channels.size(); ++s) {
    const std::size_t out_c = config_.stage_channels[s];
    Stage stage;
    for (std::size_t j = 0; j < config_.convs_per_block; ++j) {
      ConvUnit u;
      u.weight = Tensor({out_c, in_c, kConvKernel, kConvKernel});
      u.dweight = Tensor::ZerosLike(u.weight);
      if (config_.conv_bias) {
        u.bias = Tensor({out_c});
        u.dbias = Tensor({out_c});
      }
      if (config_.batch_norm) {
        u.gamma = Tensor({out_c}, 1.0);
        u.beta = Tensor({out_c});
        u.dgamma = Tensor({out_c});
        u.dbeta = Tensor({out_c});
        u.running_mean = Tensor({out_c});
        u.running_var = Tensor({out_c}, 1.0);
      }
      stage.convs.push_back(std::move(u));
      in_c = out_c;
    }
    stage.has_cbam = config_.HasCbam(s);
    if (stage.has_cbam) {
      stage.cbam = attention::MakeCbamParams(out_c, config_.cbam);
      stage.dcbam = attention::MakeCbamParams(out_c, config_.cbam);
    }
    stages_.push_back(std::move(stage));
  }

  const std::size_t stages = config_.stage_channels.size();
  std::size_t features = in_c;
  if (config_.head == HeadKind::kFlattenMlp) {
    features *= config_.SpatialAfter(config_.input_height, stages) *
                config_.SpatialAfter(config_.input_width, stages);
  }
  std::vector<std::size_t> widths = config_.classifier_hidden;
  widths.push_back(config_.num_classes);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    DenseUnit d;
    d.weight = Tensor({widths[i], features});
    d.bias = Tensor({widths[i]});
    d.dweight = Tensor::ZerosLike(d.weight);
    d.dbias = Tensor::ZerosLike(d.bias);
    d.relu = i + 1 < widths.size();
    head_.push_back(std::move(d));
    features = widths[i];
  }
}

void Model::InitParameters(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (Stage& stage : stages_) {
    for (ConvUnit& u : stage.convs) {
      KaimingUniform(u.weight, u.weight.dim(1) * kConvKernel * kConvKernel, rng);
    }
    if (stage.has_cbam) attention::InitCbamParams(stage.cbam, rng);
  }
  for (std::size_t i = 0; i < head_.size(); ++i) {
    DenseUnit& d = head_[i];
    if (d.relu) {
      KaimingUniform(d.weight, d.weight.dim(1), rng);
    } else {
      UniformFill(d.weight, kClassifierStd * std::sqrt(3.0), rng);
    }
  }
}

Model BuildModel(const ModelConfig& config, std::uint64_t seed) {
  Model model(config);
  model.InitParameters(seed);
  return model;
}

Tensor Model::Forward(const Tensor& x, Phase phase) {
  const Shape sample = config_.SampleShape();
  if (x.rank() != 4 || x.dim(1) != sample[0] || x.dim(2) != sample[1] || x.dim(3) != sample[2]) {
    throw Error(ErrorKind::kShapeMismatch, "model expects N x " + ShapeToString(sample) +
                                               " input, got " + ShapeToString(x.shape()));
  }
  batch_ = x.dim(0);
  const bool per_frame = config_.fusion == FrameFusion::kLogitMean;
  Tensor h = x;
  if (per_frame) {
    h.Reshape({batch_ * config_.frames, config_.input_channels, sample[1], sample[2]});
  }
  const nn::BatchNormMode bn_mode =
      phase == Phase::kTrain ? nn::BatchNormMode::kTrain : nn::BatchNormMode::kEval;

  for (Stage& stage : stages_) {
    for (ConvUnit& u : stage.convs) {
      u.input = h;
      Tensor z = nn::Conv2dForward(h, u.weight, u.bias, kConvSpec);
      if (config_.batch_norm) {
        z = nn::BatchNormForward(z, u.gamma, u.beta, u.running_mean, u.running_var, bn_mode,
                                 nn::kBatchNormEps, &u.bn_cache);
        if (phase == Phase::kTrain) {
          nn::UpdateRunningStats(u.bn_cache, nn::kBatchNormMomentum, u.running_mean,
                                 u.running_var);
        }
      }
      h = nn::Relu(z);
      u.pre_activation = std::move(z);
    }
    if (stage.has_cbam) h = attention::CbamForward(h, stage.cbam, config_.cbam, &stage.cbam_cache);
    stage.pool_input_shape = h.shape();
    nn::PoolResult pooled = nn::MaxPool2dForward(h, kPoolWindow, kPoolWindow);
    stage.pool_argmax = std::move(pooled.argmax);
    h = std::move(pooled.y);
  }

  features_shape_ = h.shape();
  const std::size_t images = h.dim(0);
  Tensor f = config_.head == HeadKind::kGapLinear ? nn::GlobalAvgPoolForward(h) : std::move(h);
  f.Reshape({images, f.size() / images});
  for (DenseUnit& d : head_) {
    d.input = f;
    Tensor z = nn::LinearForward(f, d.weight, d.bias);
    f = d.relu ? nn::Relu(z) : z;
    d.pre_activation = std::move(z);
  }

  if (!per_frame) return f;
  const std::size_t classes = config_.num_classes;
  Tensor logits({batch_, classes});
  const double inv = 1.0 / static_cast<double>(config_.frames);
  for (std::size_t n = 0; n < batch_; ++n) {
    for (std::size_t t = 0; t < config_.frames; ++t) {
      for (std::size_t k = 0; k < classes; ++k) {
        logits[n * classes + k] += f[(n * config_.frames + t) * classes + k];
      }
    }
    for (std::size_t k = 0; k < classes; ++k) logits[n * classes + k] *= inv;
  }
  return logits;
}

Tensor Model::Backward(const Tensor& d_logits) {
  const std::size_t classes = config_.num_classes;
  d_logits.RequireShape({batch_, classes}, "logit gradient");
  const bool per_frame = config_.fusion == FrameFusion::kLogitMean;
  Tensor d = d_logits;
  if (per_frame) {
    d = Tensor({batch_ * config_.frames, classes});
    const double inv = 1.0 / static_cast<double>(config_.frames);
    for (std::size_t n = 0; n < batch_; ++n) {
      for (std::size_t t = 0; t < config_.frames; ++t) {
        for (std::size_t k = 0; k < classes; ++k) {
          d[(n * config_.frames + t) * classes + k] = d_logits[n * classes + k] * inv;
        }
      }
    }
  }

  for (auto it = head_.rbegin(); it != head_.rend(); ++it) {
    if (it->relu) d = nn::ReluBackward(it->pre_activation, d);
    nn::LinearGrads g = nn::LinearBackward(it->input, it->weight, d);
    it->dweight += g.dweight;
    it->dbias += g.dbias;
    d = std::move(g.dx);
  }
  if (config_.head == HeadKind::kGapLinear) {
    d.Reshape({features_shape_[0], features_shape_[1], 1, 1});
    d = nn::GlobalAvgPoolBackward(features_shape_, d);
  } else {
    d.Reshape(features_shape_);
  }

  for (auto st = stages_.rbegin(); st != stages_.rend(); ++st) {
    d = nn::MaxPoolBackward(st->pool_input_shape, st->pool_argmax, d);
    if (st->has_cbam) {
      auto g = attention::CbamBackward(d, st->cbam, st->cbam_cache);
      AddCbamGrads(st->dcbam, g.dparams);
      d = std::move(g.dx);
    }
    for (auto u = st->convs.rbegin(); u != st->convs.rend(); ++u) {
      d = nn::ReluBackward(u->pre_activation, d);
      if (config_.batch_norm) {
        nn::BatchNormGrads g = nn::BatchNormBackward(d, u->gamma, u->bn_cache);
        u->dgamma += g.dgamma;
        u->dbeta += g.dbeta;
        d = std::move(g.dx);
      }
      nn::Conv2dGrads g = nn::Conv2dBackward(u->input, u->weight, config_.conv_bias, d, kConvSpec);
      u->dweight += g.dweight;
      if (config_.conv_bias) u->dbias += g.dbias;
      d = std::move(g.dx);
    }
  }
  if (per_frame) {
    const Shape sample = config_.SampleShape();
    d.Reshape({batch_, sample[0], sample[1], sample[2]});
  }
  return d;
}

namespace {

class Fnv1a {
 public:
  void Add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (v >> (8 * i)) & 0xFF;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void AddSigns(const Tensor& t) {
    for (double v : t.values()) Add(v > 0.0);
  }
  void AddIndices(const std::vector<std::size_t>& idx) {
    for (std::size_t v : idx) Add(v);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t Model::RegionSignature() const {
  Fnv1a h;
  for (const Stage& stage : stages_) {
    for (const ConvUnit& u : stage.convs) h.AddSigns(u.pre_activation);
    if (stage.has_cbam) {
      const attention::CbamCache& c = stage.cbam_cache;
      h.AddIndices(c.channel.max_argmax);
      h.AddSigns(c.channel.hidden_avg_pre);
      h.AddSigns(c.channel.hidden_max_pre);
      h.AddIndices(c.spatial.max_channel);
    }
    h.AddIndices(stage.pool_argmax);
  }
  for (const DenseUnit& d : head_) {
    if (d.relu) h.AddSigns(d.pre_activation);
  }
  return h.value();
}

void Model::ZeroGrad() {
  for (ParamRef& p : Parameters()) p.grad->Fill(0.0);
}

std::vector<ParamRef> Model::Parameters() {
  std::vector<ParamRef> out;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Stage& stage = stages_[s];
    const std::string prefix = StageName(s);
    for (std::size_t j = 0; j < stage.convs.size(); ++j) {
      ConvUnit& u = stage.convs[j];
      const std::string conv = prefix + ".conv" + std::to_string(j + 1);
      out.push_back({conv + ".weight", &u.weight, &u.dweight});
      if (config_.conv_bias) out.push_back({conv + ".bias", &u.bias, &u.dbias});
      if (config_.batch_norm) {
        const std::string bn = prefix + ".bn" + std::to_string(j + 1);
        out.push_back({bn + ".gamma", &u.gamma, &u.dgamma});
        out.push_back({bn + ".beta", &u.beta, &u.dbeta});
      }
    }
    if (stage.has_cbam) {
      auto& v = stage.cbam;
      auto& g = stage.dcbam;
      const std::string cam = prefix + ".cbam.channel";
      const std::string sam = prefix + ".cbam.spatial";
      out.push_back({cam + ".fc1.weight", &v.channel.fc1_weight, &g.channel.fc1_weight});
      out.push_back({cam + ".fc1.bias", &v.channel.fc1_bias, &g.channel.fc1_bias});
      out.push_back({cam + ".fc2.weight", &v.channel.fc2_weight, &g.channel.fc2_weight});
      out.push_back({cam + ".fc2.bias", &v.channel.fc2_bias, &g.channel.fc2_bias});
      out.push_back({sam + ".conv.weight", &v.spatial.conv_weight, &g.spatial.conv_weight});
      out.push_back({sam + ".conv.bias", &v.spatial.conv_bias, &g.spatial.conv_bias});
    }
  }
  for (std::size_t i = 0; i < head_.size(); ++i) {
    const std::string name = "head.fc" + std::to_string(i + 1);
    out.push_back({name + ".weight", &head_[i].weight, &head_[i].dweight});
    out.push_back({name + ".bias", &head_[i].bias, &head_[i].dbias});
  }
  return out;
}

std::vector<BufferRef> Model::Buffers() {
  std::vector<BufferRef> out;
  if (!config_.batch_norm) return out;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t j = 0; j < stages_[s].convs.size(); ++j) {
      ConvUnit& u = stages_[s].convs[j];
      const std::string bn = StageName(s) + ".bn" + std::to_string(j + 1);
      out.push_back({bn + ".running_mean", &u.running_mean});
      out.push_back({bn + ".running_var", &u.running_var});
    }
  }
  return out;
}

std::size_t Model::ParameterCount() const {
  return static_cast<std::size_t>(CountParams(const_cast<Model&>(*this)));
}

// ---- accounting -----------------------------------------------------------

std::vector<LayerCost> ProfileModel(const ModelConfig& config) {
  config.Validate();
  std::vector<LayerCost> rows;
  std::uint64_t c = config.input_channels;
  std::uint64_t h = config.input_height;
  std::uint64_t w = config.input_width;
  constexpr std::uint64_t k2 = kConvKernel * kConvKernel;

  for (std::size_t s = 0; s < config.stage_channels.size(); ++s) {
    const std::string prefix = StageName(s);
    const std::uint64_t co = config.stage_channels[s];
    for (std::size_t j = 0; j < config.convs_per_block; ++j) {
      const std::string idx = std::to_string(j + 1);
      const std::uint64_t out = co * h * w;
      rows.push_back({prefix + ".conv" + idx, "conv3x3", {co, h, w},
                      co * c * k2 + (config.conv_bias ? co : 0),
                      2 * co * c * k2 * h * w + (config.conv_bias ? out : 0)});
      if (config.batch_norm) {
        rows.push_back({prefix + ".bn" + idx, "batchnorm", {co, h, w}, 2 * co, 2 * out});
      }
      rows.push_back({prefix + ".relu" + idx, "relu", {co, h, w}, 0, out});
      c = co;
    }
    if (config.HasCbam(s)) {
      const std::uint64_t hidden = attention::HiddenWidth(c, config.cbam.reduction);
      const std::uint64_t kk = config.cbam.kernel * config.cbam.kernel;
      const std::uint64_t plane = h * w;
      const std::uint64_t mlp = (2 * c * hidden + hidden) + hidden + (2 * hidden * c + c);
      rows.push_back({prefix + ".cbam.channel", "channel_attention", {c, h, w},
                      c * hidden + hidden + hidden * c + c,
                      2 * c * plane + 2 * mlp + c + c + c * plane});
      rows.push_back({prefix + ".cbam.spatial", "spatial_attention", {c, h, w}, 2 * kk + 1,
                      2 * c * plane + (2 * 2 * kk * plane + plane) + plane + c * plane});
      if (config.cbam.residual) {
        rows.push_back({prefix + ".cbam.residual", "add", {c, h, w}, 0, c * plane});
      }
    }
    h /= kPoolWindow;
    w /= kPoolWindow;
    rows.push_back({prefix + ".pool", "maxpool2x2", {c, h, w}, 0,
                    kPoolWindow * kPoolWindow * c * h * w});
  }

  std::uint64_t features = c;
  if (config.head == HeadKind::kGapLinear) {
    rows.push_back({"head.gap", "global_avg_pool", {c}, 0, c * h * w});
  } else {
    features = c * h * w;
  }
  std::vector<std::size_t> widths = config.classifier_hidden;
  widths.push_back(config.num_classes);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const std::uint64_t fo = widths[i];
    const std::string name = "head.fc" + std::to_string(i + 1);
    rows.push_back({name, "linear", {fo}, features * fo + fo, 2 * features * fo + fo});
    if (i + 1 < widths.size()) {
      rows.push_back({"head.relu" + std::to_string(i + 1), "relu", {fo}, 0, fo});
    }
    features = fo;
  }

  if (config.fusion == FrameFusion::kLogitMean) {
    for (LayerCost& row : rows) row.flops *= config.frames;
    rows.push_back({"fusion.logit_mean", "mean", {config.num_classes}, 0,
                    config.num_classes * config.frames});
  }
  return rows;
}

std::uint64_t CountParams(Model& model) {
  std::uint64_t total = 0;
  for (const ParamRef& p : model.Parameters()) total += p.value->size();
  return total;
}

double CountMegaFlops(const Model& model, const Shape& sample_shape) {
  if (sample_shape.size() != 3) {
    throw Error(ErrorKind::kShapeMismatch, "sample shape must be C x H x W");
  }
  ModelConfig config = model.config();
  const std::size_t per_image = config.fusion == FrameFusion::kLogitMean ? config.frames : 1;
  if (sample_shape[0] % per_image != 0) {
    throw Error(ErrorKind::kShapeMismatch, "channels not divisible by frame count");
  }
  config.input_channels = sample_shape[0] / per_image;
  config.input_height = sample_shape[1];
  config.input_width = sample_shape[2];
  std::uint64_t flops = 0;
  for (const LayerCost& row : ProfileModel(config)) flops += row.flops;
  return static_cast<double>(flops) / 1e6;
}

std::string FormatCostTable(const std::vector<LayerCost>& costs) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-18s %-16s %14s %14s\n", "layer", "kind", "output",
                "params", "MFLOPs");
  os << line;
  std::uint64_t params = 0, flops = 0;
  for (const LayerCost& row : costs) {
    std::snprintf(line, sizeof(line), "%-28s %-18s %-16s %14llu %14.4f\n", row.name.c_str(),
                  row.kind.c_str(), ShapeToString(row.output).c_str(),
                  static_cast<unsigned long long>(row.params), static_cast<double>(row.flops) / 1e6);
    os << line;
    params += row.params;
    flops += row.flops;
  }
  std::snprintf(line, sizeof(line), "%-28s %-18s %-16s %14llu %14.4f\n", "total", "", "",
                static_cast<unsigned long long>(params), static_cast<double>(flops) / 1e6);
  os << line;
  return os.str();
}

std::string FormatCostDelta(const std::vector<LayerCost>& baseline,
                            const std::vector<LayerCost>& candidate,
                            const std::string& baseline_name, const std::string& candidate_name) {
  std::vector<std::string> order;
  std::map<std::string, const LayerCost*> base_rows, cand_rows;
  for (const LayerCost& r : baseline) {
    order.push_back(r.name);
    base_rows[r.name] = &r;
  }
  for (const LayerCost& r : candidate) {
    if (!base_rows.count(r.name)) order.push_back(r.name);
    cand_rows[r.name] = &r;
  }

  std::ostringstream os;
  os << "baseline:  " << baseline_name << "\ncandidate: " << candidate_name << "\n";
  char line[320];
  std::snprintf(line, sizeof(line), "%-28s %13s %13s %14s %12s %12s %13s\n", "layer",
                "params(base)", "params(cand)", "params(delta)", "MFLOPs(base)", "MFLOPs(cand)",
                "MFLOPs(delta)");
  os << line;
  long long base_params = 0, cand_params = 0;
  long long base_flops = 0, cand_flops = 0;
  for (const std::string& name : order) {
    const LayerCost* b = base_rows.count(name) ? base_rows[name] : nullptr;
    const LayerCost* c = cand_rows.count(name) ? cand_rows[name] : nullptr;
    const long long bp = b ? static_cast<long long>(b->params) : 0;
    const long long cp = c ? static_cast<long long>(c->params) : 0;
    const long long bf = b ? static_cast<long long>(b->flops) : 0;
    const long long cf = c ? static_cast<long long>(c->flops) : 0;
    base_params += bp;
    cand_params += cp;
    base_flops += bf;
    cand_flops += cf;
    std::snprintf(line, sizeof(line), "%-28s %13lld %13lld %+14lld %12.4f %12.4f %+13.4f\n",
                  name.c_str(), bp, cp, cp - bp, static_cast<double>(bf) / 1e6,
                  static_cast<double>(cf) / 1e6, static_cast<double>(cf - bf) / 1e6);
    os << line;
  }
  std::snprintf(line, sizeof(line), "%-28s %13lld %13lld %+14lld %12.4f %12.4f %+13.4f\n",
                "total", base_params, cand_params, cand_params - base_params,
                static_cast<double>(base_flops) / 1e6, static_cast<double>(cand_flops) / 1e6,
                static_cast<double>(cand_flops - base_flops) / 1e6);
  os << line;
  const double param_change =
      base_params ? 100.0 * static_cast<double>(cand_params - base_params) / base_params : 0.0;
  const double flop_change =
      base_flops ? 100.0 * static_cast<double>(cand_flops - base_flops) / base_flops : 0.0;
  std::snprintf(line, sizeof(line), "relative change: params %+.3f%%, FLOPs %+.3f%%\n",
                param_change, flop_change);
  os << line;
  return os.str();
}

}  // namespace evframe
