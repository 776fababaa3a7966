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


#include "evframe/model_config.h"

#include <algorithm>
#include <set>
#include <string>

#include "evframe/error.h"
#include "evframe/json_reader.h"

namespace evframe {

namespace {

[[noreturn]] void Invalid(const std::string& field, const std::string& message) {
  throw Error(ErrorKind::kInvalidConfig, "model." + field + ": " + message);
}

template <typename Parse>
auto ParseField(JsonObjectReader& r, const std::string& key, const std::string& fallback,
                Parse parse) {
  const std::string value = r.Get<std::string>(key, fallback);
  try {
    return parse(value);
  } catch (const Error& e) {
    JsonObjectReader::Fail(r.Field(key), e.detail());
  }
}

}  // namespace

HeadKind ParseHeadKind(std::string_view name) {
  if (name == "gap_linear") return HeadKind::kGapLinear;
  if (name == "flatten_mlp") return HeadKind::kFlattenMlp;
  throw Error(ErrorKind::kInvalidArgument, "unknown head '" + std::string(name) + "'");
}

FrameFusion ParseFrameFusion(std::string_view name) {
  if (name == "channels") return FrameFusion::kChannels;
  if (name == "logit_mean") return FrameFusion::kLogitMean;
  throw Error(ErrorKind::kInvalidArgument, "unknown frame fusion '" + std::string(name) + "'");
}

std::string_view HeadKindName(HeadKind kind) {
  return kind == HeadKind::kGapLinear ? "gap_linear" : "flatten_mlp";
}

std::string_view FrameFusionName(FrameFusion fusion) {
  return fusion == FrameFusion::kChannels ? "channels" : "logit_mean";
}

Shape ModelConfig::SampleShape() const {
  const std::size_t channels =
      fusion == FrameFusion::kLogitMean ? frames * input_channels : input_channels;
  return {channels, input_height, input_width};
}

bool ModelConfig::HasCbam(std::size_t stage) const {
  return std::find(cbam_stages.begin(), cbam_stages.end(), stage) != cbam_stages.end();
}

std::size_t ModelConfig::SpatialAfter(std::size_t size, std::size_t stages) const {
  for (std::size_t s = 0; s < stages; ++s) size /= 2;
  return size;
}

void ModelConfig::Validate() const {
  if (input_channels == 0) Invalid("input_channels", "must be positive");
  if (input_height == 0 || input_width == 0) Invalid("input_size", "must be positive");
  if (stage_channels.empty()) Invalid("stage_channels", "need at least one stage");
  for (std::size_t c : stage_channels) {
    if (c == 0) Invalid("stage_channels", "every stage needs at least one channel");
  }
  if (convs_per_block == 0) Invalid("convs_per_block", "must be positive");
  if (num_classes == 0) Invalid("num_classes", "must be positive");
  if (frames == 0) Invalid("frames", "must be positive");
  if (fusion == FrameFusion::kChannels && frames != 1) {
    Invalid("frames", "must be 1 unless fusion is logit_mean");
  }
  std::set<std::size_t> seen;
  for (std::size_t s : cbam_stages) {
    if (s >= stage_channels.size()) {
      Invalid("cbam.stages", "stage index " + std::to_string(s) + " out of range");
    }
    if (!seen.insert(s).second) Invalid("cbam.stages", "duplicate stage " + std::to_string(s));
  }
  if (cbam.reduction == 0) Invalid("cbam.reduction", "must be positive");
  if (cbam.kernel == 0 || cbam.kernel % 2 == 0) Invalid("cbam.kernel", "must be odd");
  for (std::size_t h : classifier_hidden) {
    if (h == 0) Invalid("classifier_hidden", "widths must be positive");
  }
  const std::size_t stages = stage_channels.size();
  if (SpatialAfter(input_height, stages) < 1 || SpatialAfter(input_width, stages) < 1) {
    Invalid("stage_channels", std::to_string(stages) + " pooling stages collapse a " +
                                  std::to_string(input_height) + "x" +
                                  std::to_string(input_width) + " input below 1x1");
  }
}

nlohmann::json ModelConfigToJson(const ModelConfig& c) {
  nlohmann::json j;
  j["input_channels"] = c.input_channels;
  j["input_height"] = c.input_height;
  j["input_width"] = c.input_width;
  j["stage_channels"] = c.stage_channels;
  j["convs_per_block"] = c.convs_per_block;
  j["batch_norm"] = c.batch_norm;
  j["conv_bias"] = c.conv_bias;
  j["cbam"] = {
      {"stages", c.cbam_stages},
      {"reduction", c.cbam.reduction},
      {"kernel", c.cbam.kernel},
      {"order", std::string(attention::CbamOrderName(c.cbam.order))},
      {"residual", c.cbam.residual},
  };
  j["num_classes"] = c.num_classes;
  j["head"] = std::string(HeadKindName(c.head));
  j["classifier_hidden"] = c.classifier_hidden;
  j["fusion"] = std::string(FrameFusionName(c.fusion));
  j["frames"] = c.frames;
  return j;
}

ModelConfig ModelConfigFromJson(const nlohmann::json& json, const std::string& path) {
  ModelConfig c;
  JsonObjectReader r(json, path);
  c.input_channels = r.Get<std::size_t>("input_channels", c.input_channels);
  c.input_height = r.Get<std::size_t>("input_height", c.input_height);
  c.input_width = r.Get<std::size_t>("input_width", c.input_width);
  c.stage_channels = r.Get<std::vector<std::size_t>>("stage_channels", c.stage_channels);
  c.convs_per_block = r.Get<std::size_t>("convs_per_block", c.convs_per_block);
  c.batch_norm = r.Get<bool>("batch_norm", c.batch_norm);
  c.conv_bias = r.Get<bool>("conv_bias", !c.batch_norm);
  {
    JsonObjectReader cbam = r.Child("cbam");
    std::vector<std::size_t> every_stage;
    for (std::size_t s = 0; s < c.stage_channels.size(); ++s) every_stage.push_back(s);
    c.cbam_stages = cbam.Get<std::vector<std::size_t>>("stages", every_stage);
    c.cbam.reduction = cbam.Get<std::size_t>("reduction", c.cbam.reduction);
    c.cbam.kernel = cbam.Get<std::size_t>("kernel", c.cbam.kernel);
    c.cbam.order = ParseField(cbam, "order", "cam_then_sam", attention::ParseCbamOrder);
    c.cbam.residual = cbam.Get<bool>("residual", c.cbam.residual);
    cbam.Finish();
  }
  c.num_classes = r.Get<std::size_t>("num_classes", c.num_classes);
  c.head = ParseField(r, "head", "gap_linear", ParseHeadKind);
  c.classifier_hidden = r.Get<std::vector<std::size_t>>("classifier_hidden", {});
  c.fusion = ParseField(r, "fusion", "channels", ParseFrameFusion);
  c.frames = r.Get<std::size_t>("frames", c.frames);
  r.Finish();
  c.Validate();
  return c;
}

std::uint64_t ModelConfigDigest(const ModelConfig& config) {
  const std::string canonical = ModelConfigToJson(config).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

ModelConfig VggOriginalPreset(std::size_t height, std::size_t width, std::size_t num_classes) {
  ModelConfig c;
  c.input_channels = 3;
  c.input_height = height;
  c.input_width = width;
  c.batch_norm = false;
  c.conv_bias = true;
  c.cbam_stages.clear();
  c.num_classes = num_classes;
  c.head = HeadKind::kFlattenMlp;
  c.classifier_hidden = {4096, 4096};
  return c;
}

}  // namespace evframe
