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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "evframe/dataset.h"
#include "evframe/model.h"
#include "evframe/optim.h"
#include "json.hpp"

namespace evframe {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 128;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  // Log wall_time_s as 0 so that repeated runs produce identical logs.
  bool deterministic = false;

  void Validate() const;
};

nlohmann::json TrainConfigToJson(const TrainConfig& config);
// Rejects unknown keys; `path` prefixes field names in error messages.
TrainConfig TrainConfigFromJson(const nlohmann::json& json, const std::string& path = "train");

// One metrics-log record. Splits: "fit" is the running train-mode minibatch
// average of the epoch; "train" and "test" are eval-mode passes afterwards.
struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double top1 = 0.0;
  double wall_time_s = 0.0;
};

nlohmann::json MetricsToJson(const EpochMetrics& m);
EpochMetrics MetricsFromJson(const nlohmann::json& json);

struct EvalResult {
  double loss = 0.0;  // mean cross-entropy
  double top1 = 0.0;  // correct / total
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
  std::vector<std::int32_t> predictions;
};

// Index of the largest value; ties go to the lowest index.
std::size_t ArgMax(const double* values, std::size_t count);

// Eval-mode pass. EmptyDataset when the dataset has no samples.
EvalResult Evaluate(Model& model, const Dataset& dataset, std::size_t batch_size);

// Plain-text grid, rows = true class, columns = predicted class.
std::string FormatConfusion(const EvalResult& result, const std::vector<std::string>& classes);

struct TrainState {
  std::size_t epochs_completed = 0;
  AdamState optimizer;
  std::vector<EpochMetrics> history;
  double best_top1 = -1.0;
  std::size_t best_epoch = 0;
};

struct TrainOutputs {
  // When set, receives metrics.ndjson, last.ckpt and best.ckpt.
  std::filesystem::path dir;
  // Checkpoint to continue from (written by an earlier run of the same config).
  std::filesystem::path resume;
  std::ostream* progress = nullptr;
};

inline constexpr char kMetricsFileName[] = "metrics.ndjson";
inline constexpr char kLastCheckpointName[] = "last.ckpt";
inline constexpr char kBestCheckpointName[] = "best.ckpt";

// Adam on mean softmax cross-entropy. Epoch e visits the training set in the
// order SeededPermutation(n, MixSeed(seed, e)); a final batch of one sample
// joins the previous batch. The best checkpoint tracks test top-1 (train
// top-1 when `test` is null or empty); ties keep the earlier epoch.
// EmptyDataset when `train` is empty.
TrainState Train(Model& model, const Dataset& train, const Dataset* test,
                 const TrainConfig& config, const TrainOutputs& outputs = {});

}  // namespace evframe
