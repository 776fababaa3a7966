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


#include "evframe/run_config.h"

#include <fstream>
#include <sstream>

#include "evframe/byte_io.h"
#include "evframe/error.h"
#include "evframe/json_reader.h"

namespace evframe {

namespace fs = std::filesystem;

namespace {

template <typename Parse>
auto ParseEnum(JsonObjectReader& r, const std::string& key, const std::string& fallback,
               Parse parse) {
  const std::string value = r.Get<std::string>(key, fallback);
  try {
    return parse(value);
  } catch (const Error& e) {
    JsonObjectReader::Fail(r.Field(key), e.detail());
  }
}

void RequireAgreement(const nlohmann::json& model, const char* key, std::size_t derived,
                      const std::string& source) {
  if (!model.contains(key)) return;
  const nlohmann::json& v = model.at(key);
  if (!v.is_number_unsigned() || v.get<std::size_t>() != derived) {
    throw Error(ErrorKind::kInvalidConfig, std::string("model.") + key + ": " + v.dump() +
                                               " disagrees with " + source + " (" +
                                               std::to_string(derived) + ")");
  }
}

}  // namespace

RunConfig ParseRunConfig(const nlohmann::json& json, bool check_paths) {
  RunConfig run;
  JsonObjectReader r(json, "");
  {
    JsonObjectReader d = r.Child("data");
    run.data.root = d.Require<std::string>("root");
    run.data.raw = d.Get<std::string>("raw", "");
    if (d.Has("format")) {
      run.data.format = ParseEnum(d, "format", "", ParseEventFormat);
    }
    run.data.auto_convert = d.Get<bool>("auto_convert", false);
    run.data.train_fraction = d.Get<double>("train_fraction", run.data.train_fraction);
    if (!(run.data.train_fraction > 0.0 && run.data.train_fraction <= 1.0)) {
      JsonObjectReader::Fail(d.Field("train_fraction"), "must lie in (0, 1]");
    }
    d.Finish();
    if (run.data.auto_convert) {
      if (run.data.raw.empty()) JsonObjectReader::Fail("data.raw", "required with auto_convert");
      if (!run.data.format) JsonObjectReader::Fail("data.format", "required with auto_convert");
    }
  }
  if (r.Has("representation")) {
    JsonObjectReader p = r.Child("representation");
    RepresentationConfig rep;
    rep.slices = p.Get<std::size_t>("slices", rep.slices);
    if (rep.slices == 0) JsonObjectReader::Fail(p.Field("slices"), "must be positive");
    rep.slice_mode = ParseEnum(p, "slice_mode", "remainder", ParseSliceMode);
    rep.reduce = ParseEnum(p, "reduce", "mean", ParseTemporalReduce);
    rep.normalize = ParseEnum(p, "normalize", "max", ParseNormalization);
    p.Finish();
    run.representation = rep;
  }
  {
    r.Child("model");  // marks the key; parsed once the data is known
    run.model_json = json.contains("model") ? json.at("model") : nlohmann::json::object();
    if (!run.model_json.is_object()) JsonObjectReader::Fail("model", "expected an object");
  }
  run.seed = r.Get<std::uint64_t>("seed", 0);
  nlohmann::json train_json = json.contains("train") ? json.at("train") : nlohmann::json::object();
  r.Child("train");
  if (train_json.is_object() && !train_json.contains("seed")) train_json["seed"] = run.seed;
  run.train = TrainConfigFromJson(train_json, "train");
  run.output_dir = r.Require<std::string>("output_dir");
  r.Finish();

  if (check_paths) {
    if (run.data.auto_convert) {
      if (!fs::exists(run.data.raw)) {
        JsonObjectReader::Fail("data.raw", "path does not exist: " + run.data.raw.string());
      }
    } else if (!fs::exists(run.data.root)) {
      JsonObjectReader::Fail("data.root", "path does not exist: " + run.data.root.string());
    } else if (!fs::exists(run.data.root / kManifestFileName)) {
      JsonObjectReader::Fail("data.root", "no " + std::string(kManifestFileName) + " in " +
                                              run.data.root.string() +
                                              "; run `evframe convert` first");
    }
  }
  return run;
}

RunConfig LoadRunConfig(const fs::path& path, bool check_paths) {
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "config file not found: " + path.string());
  const Bytes bytes = ReadFileBytes(path);
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidConfig, path.string() + ": " + e.what());
  }
  return ParseRunConfig(json, check_paths);
}

RepresentationConfig EffectiveRepresentation(const RunConfig& run, const Manifest& manifest) {
  if (!run.representation) return manifest.representation;
  const RepresentationConfig& rep = *run.representation;
  if (rep.slices != manifest.representation.slices) {
    throw Error(ErrorKind::kInvalidConfig,
                "representation.slices: " + std::to_string(rep.slices) +
                    " but the data was converted with " +
                    std::to_string(manifest.representation.slices));
  }
  if (rep.slice_mode != manifest.representation.slice_mode) {
    throw Error(ErrorKind::kInvalidConfig,
                "representation.slice_mode: the data was converted with " +
                    std::string(SliceModeName(manifest.representation.slice_mode)));
  }
  return rep;
}

ModelConfig ResolveModelConfig(const RunConfig& run, const Manifest& manifest) {
  const RepresentationConfig rep = EffectiveRepresentation(run, manifest);
  nlohmann::json model = run.model_json;
  const bool logit_mean = model.value("fusion", std::string("channels")) == "logit_mean";
  std::size_t channels = rep.InputChannels();
  if (logit_mean) {
    if (rep.reduce != TemporalReduce::kStack) {
      throw Error(ErrorKind::kInvalidConfig,
                  "model.fusion: logit_mean needs representation.reduce = stack");
    }
    RequireAgreement(model, "frames", rep.slices, "representation.slices");
    model["frames"] = rep.slices;
    channels = 2;
  }
  const std::string data = "the converted data";
  RequireAgreement(model, "input_channels", channels, data);
  RequireAgreement(model, "input_height", manifest.height, data);
  RequireAgreement(model, "input_width", manifest.width, data);
  RequireAgreement(model, "num_classes", manifest.classes.size(), data);
  model["input_channels"] = channels;
  model["input_height"] = manifest.height;
  model["input_width"] = manifest.width;
  model["num_classes"] = manifest.classes.size();
  return ModelConfigFromJson(model, "model");
}

}  // namespace evframe
