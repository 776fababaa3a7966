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

#include <cstdint>
#include <filesystem>
#include <optional>

#include "evframe/codec.h"
#include "evframe/dataset.h"
#include "evframe/model_config.h"
#include "evframe/train.h"
#include "json.hpp"

namespace evframe {

struct DataConfig {
  // Converted directory holding manifest.tsv and the .frm files.
  std::filesystem::path root;
  // Raw <class>/<sample> tree, converted into `root` when auto_convert is
  // set and `root` has no manifest yet.
  std::filesystem::path raw;
  std::optional<EventFormat> format;
  bool auto_convert = false;
  double train_fraction = 0.9;
};

// One JSON document with sections data, representation, model, train plus
// output_dir and seed. Relative paths are taken relative to the working
// directory.
struct RunConfig {
  DataConfig data;
  // Absent: use the settings recorded in the manifest.
  std::optional<RepresentationConfig> representation;
  nlohmann::json model_json = nlohmann::json::object();
  TrainConfig train;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
};

// Strict parse: unknown keys and wrong types raise InvalidConfig naming the
// field. With `check_paths`, data.root (or data.raw under auto_convert) must
// exist.
RunConfig ParseRunConfig(const nlohmann::json& json, bool check_paths);
RunConfig LoadRunConfig(const std::filesystem::path& path, bool check_paths = true);

// Representation in effect for this run given the converted data.
RepresentationConfig EffectiveRepresentation(const RunConfig& run, const Manifest& manifest);

// Model config with the input size, channel count, class count and (for
// logit_mean) frame count filled in from the data when the model section
// leaves them out; explicit values must agree with the data.
ModelConfig ResolveModelConfig(const RunConfig& run, const Manifest& manifest);

}  // namespace evframe
