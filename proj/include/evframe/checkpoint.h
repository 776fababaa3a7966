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
#include <string>
#include <vector>

#include "evframe/byte_io.h"
#include "evframe/model.h"
#include "evframe/model_config.h"
#include "evframe/optim.h"
#include "evframe/tensor.h"
#include "json.hpp"

namespace evframe {

inline constexpr char kCheckpointMagic[] = "EVCKPT01";

struct NamedTensor {
  std::string name;
  Tensor value;
};

// File layout (little-endian):
//   magic[8] "EVCKPT01" | config digest u64 | u32 len + model config JSON
//   | u32 len + training-state JSON | u64 tensor count
//   | per tensor: u16 len + name, dtype u8 (0 = f64), ndim u8,
//     dims u64 x ndim, payload f64 x prod(dims)
// Tensor order is parameters, then batchnorm buffers, then Adam moments
// ("adam.m.<param>", "adam.v.<param>").
struct Checkpoint {
  ModelConfig config;
  std::uint64_t digest = 0;
  nlohmann::json state = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor* Find(const std::string& name) const;
};

Bytes EncodeCheckpoint(const Checkpoint& checkpoint);
// BadMagic, TruncatedRecord, MalformedHeader (bad JSON or dtype) or
// ConfigDigestMismatch when the stored digest disagrees with the stored config.
Checkpoint DecodeCheckpoint(std::span<const std::uint8_t> bytes);

// Snapshot of model parameters, buffers and (optionally) optimizer moments.
Checkpoint CaptureCheckpoint(Model& model, const AdamState* optimizer, nlohmann::json state);

// Copies tensors back into the model (and optimizer when given). Throws
// ConfigDigestMismatch when the checkpoint was written for another config and
// ShapeMismatch when a tensor is missing or has the wrong shape.
void RestoreCheckpoint(const Checkpoint& checkpoint, Model& model, AdamState* optimizer);

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace evframe
