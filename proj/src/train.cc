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


#include "evframe/train.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "evframe/byte_io.h"
#include "evframe/checkpoint.h"
#include "evframe/error.h"
#include "evframe/json_reader.h"
#include "evframe/nn.h"
#include "evframe/parallel.h"

namespace evframe {

namespace {

struct Batch {
  Tensor inputs;
  std::vector<std::int32_t> labels;
};

Batch AssembleBatch(const Dataset& dataset, std::span<const std::size_t> indices) {
  Shape shape = dataset.sample_shape();
  const std::size_t per_sample = ShapeSize(shape);
  shape.insert(shape.begin(), indices.size());
  Batch batch{Tensor(shape), std::vector<std::int32_t>(indices.size())};
  ParallelFor(indices.size(), [&](std::size_t b) {
    const Tensor sample = dataset.Load(indices[b]);
    sample.RequireShape(dataset.sample_shape(), "dataset sample");
    std::copy(sample.data(), sample.data() + per_sample, batch.inputs.data() + b * per_sample);
    batch.labels[b] = dataset.label(indices[b]);
  });
  return batch;
}

std::vector<std::pair<std::size_t, std::size_t>> BatchRanges(std::size_t n, std::size_t batch) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < n; begin += batch) {
    ranges.emplace_back(begin, std::min(n, begin + batch));
  }
  if (ranges.size() > 1 && ranges.back().second - ranges.back().first == 1) {
    ranges[ranges.size() - 2].second = n;
    ranges.pop_back();
  }
  return ranges;
}

void RequireCompatible(const Model& model, const Dataset& dataset, const char* what) {
  if (dataset.sample_shape() != model.config().SampleShape()) {
    throw Error(ErrorKind::kShapeMismatch,
                std::string(what) + " samples are " + ShapeToString(dataset.sample_shape()) +
                    " but the model expects " + ShapeToString(model.config().SampleShape()));
  }
  if (dataset.num_classes() > model.config().num_classes) {
    throw Error(ErrorKind::kLabelOutOfRange, std::string(what) + " has " +
                                                 std::to_string(dataset.num_classes()) +
                                                 " classes, model has " +
                                                 std::to_string(model.config().num_classes));
  }
}

nlohmann::json StateToJson(const TrainState& state, const TrainConfig& config) {
  nlohmann::json history = nlohmann::json::array();
  for (const EpochMetrics& m : state.history) history.push_back(MetricsToJson(m));
  return {
      {"epoch", state.epochs_completed},
      {"adam_step", state.optimizer.step},
      {"best_top1", state.best_top1},
      {"best_epoch", state.best_epoch},
      {"train", TrainConfigToJson(config)},
      {"history", history},
  };
}

}  // namespace

void TrainConfig::Validate() const {
  adam.Validate();
  if (batch_size == 0) throw Error(ErrorKind::kInvalidConfig, "train.batch_size: must be positive");
  if (epochs == 0) throw Error(ErrorKind::kInvalidConfig, "train.epochs: must be positive");
}

nlohmann::json TrainConfigToJson(const TrainConfig& c) {
  return {
      {"lr", c.adam.lr},       {"beta1", c.adam.beta1},          {"beta2", c.adam.beta2},
      {"eps", c.adam.eps},     {"batch_size", c.batch_size},     {"epochs", c.epochs},
      {"seed", c.seed},        {"deterministic", c.deterministic}, {"precision", "f64"},
  };
}

TrainConfig TrainConfigFromJson(const nlohmann::json& json, const std::string& path) {
  TrainConfig c;
  JsonObjectReader r(json, path);
  c.adam.lr = r.Get<double>("lr", c.adam.lr);
  c.adam.beta1 = r.Get<double>("beta1", c.adam.beta1);
  c.adam.beta2 = r.Get<double>("beta2", c.adam.beta2);
  c.adam.eps = r.Get<double>("eps", c.adam.eps);
  c.batch_size = r.Get<std::size_t>("batch_size", c.batch_size);
  c.epochs = r.Get<std::size_t>("epochs", c.epochs);
  c.seed = r.Get<std::uint64_t>("seed", c.seed);
  c.deterministic = r.Get<bool>("deterministic", c.deterministic);
  if (r.Get<std::string>("precision", "f64") != "f64") {
    JsonObjectReader::Fail(r.Field("precision"), "only \"f64\" is supported");
  }
  r.Finish();
  c.Validate();
  return c;
}

nlohmann::json MetricsToJson(const EpochMetrics& m) {
  return {{"epoch", m.epoch},
          {"split", m.split},
          {"loss", m.loss},
          {"top1", m.top1},
          {"wall_time_s", m.wall_time_s}};
}

EpochMetrics MetricsFromJson(const nlohmann::json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<std::size_t>();
  m.split = j.at("split").get<std::string>();
  m.loss = j.at("loss").get<double>();
  m.top1 = j.at("top1").get<double>();
  m.wall_time_s = j.at("wall_time_s").get<double>();
  return m;
}

std::size_t ArgMax(const double* values, std::size_t count) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < count; ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

EvalResult Evaluate(Model& model, const Dataset& dataset, std::size_t batch_size) {
  if (dataset.size() == 0) throw Error(ErrorKind::kEmptyDataset, "nothing to evaluate");
  if (batch_size == 0) throw Error(ErrorKind::kInvalidArgument, "batch size must be positive");
  RequireCompatible(model, dataset, "evaluation set");
  const std::size_t classes = model.config().num_classes;
  EvalResult result;
  result.total = dataset.size();
  result.confusion.assign(classes, std::vector<std::uint64_t>(classes, 0));
  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  double loss_sum = 0.0;
  for (const auto& [begin, end] : BatchRanges(all.size(), batch_size)) {
    Batch batch = AssembleBatch(dataset, std::span(all).subspan(begin, end - begin));
    const Tensor logits = model.Forward(batch.inputs, Phase::kEval);
    loss_sum += nn::SoftmaxCrossEntropy(logits, batch.labels).loss *
                static_cast<double>(end - begin);
    for (std::size_t b = 0; b < end - begin; ++b) {
      const std::size_t pred = ArgMax(logits.data() + b * classes, classes);
      result.predictions.push_back(static_cast<std::int32_t>(pred));
      result.confusion[batch.labels[b]][pred] += 1;
      if (static_cast<std::int32_t>(pred) == batch.labels[b]) ++result.correct;
    }
  }
  result.loss = loss_sum / static_cast<double>(result.total);
  result.top1 = static_cast<double>(result.correct) / static_cast<double>(result.total);
  return result;
}

std::string FormatConfusion(const EvalResult& result, const std::vector<std::string>& classes) {
  std::ostringstream os;
  os << "# rows: true class, columns: predicted class\n";
  for (std::size_t k = 0; k < result.confusion.size(); ++k) {
    os << "# " << k << " " << (k < classes.size() ? classes[k] : std::to_string(k)) << "\n";
  }
  for (const auto& row : result.confusion) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? " " : "") << row[k];
    os << "\n";
  }
  return os.str();
}

TrainState Train(Model& model, const Dataset& train, const Dataset* test,
                 const TrainConfig& config, const TrainOutputs& outputs) {
  config.Validate();
  if (train.size() == 0) throw Error(ErrorKind::kEmptyDataset, "training set is empty");
  RequireCompatible(model, train, "training set");
  const bool has_test = test != nullptr && test->size() > 0;
  if (has_test) RequireCompatible(model, *test, "test set");

  const std::vector<ParamRef> params = model.Parameters();
  TrainState state;
  state.optimizer = MakeAdamState(params);
  if (!outputs.resume.empty()) {
    const Checkpoint ckpt = LoadCheckpoint(outputs.resume);
    RestoreCheckpoint(ckpt, model, &state.optimizer);
    state.epochs_completed = ckpt.state.at("epoch").get<std::size_t>();
    state.best_top1 = ckpt.state.at("best_top1").get<double>();
    state.best_epoch = ckpt.state.at("best_epoch").get<std::size_t>();
    for (const auto& record : ckpt.state.at("history")) {
      state.history.push_back(MetricsFromJson(record));
    }
  }

  const bool write = !outputs.dir.empty();
  std::ofstream log;
  if (write) {
    std::filesystem::create_directories(outputs.dir);
    log.open(outputs.dir / kMetricsFileName, std::ios::trunc);
    if (!log) throw Error(ErrorKind::kIo, "cannot write " + (outputs.dir / kMetricsFileName).string());
    for (const EpochMetrics& m : state.history) log << MetricsToJson(m).dump() << "\n";
    log.flush();
  }

  using Clock = std::chrono::steady_clock;
  const Clock::time_point start = Clock::now();
  auto elapsed = [&] {
    if (config.deterministic) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  const std::size_t classes = model.config().num_classes;

  for (std::size_t epoch = state.epochs_completed + 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> order = SeededPermutation(train.size(), MixSeed(config.seed, epoch));
    double fit_loss = 0.0;
    std::size_t fit_correct = 0;
    for (const auto& [begin, end] : BatchRanges(order.size(), config.batch_size)) {
      Batch batch = AssembleBatch(train, std::span(order).subspan(begin, end - begin));
      model.ZeroGrad();
      const Tensor logits = model.Forward(batch.inputs, Phase::kTrain);
      const nn::LossResult loss = nn::SoftmaxCrossEntropy(logits, batch.labels);
      model.Backward(loss.grad);
      AdamStep(params, state.optimizer, config.adam);
      fit_loss += loss.loss * static_cast<double>(end - begin);
      for (std::size_t b = 0; b < end - begin; ++b) {
        if (static_cast<std::int32_t>(ArgMax(logits.data() + b * classes, classes)) ==
            batch.labels[b]) {
          ++fit_correct;
        }
      }
    }
    const double n = static_cast<double>(train.size());
    std::vector<EpochMetrics> records;
    records.push_back({epoch, "fit", fit_loss / n, static_cast<double>(fit_correct) / n, elapsed()});
    const EvalResult on_train = Evaluate(model, train, config.batch_size);
    records.push_back({epoch, "train", on_train.loss, on_train.top1, elapsed()});
    double selection = on_train.top1;
    if (has_test) {
      const EvalResult on_test = Evaluate(model, *test, config.batch_size);
      records.push_back({epoch, "test", on_test.loss, on_test.top1, elapsed()});
      selection = on_test.top1;
    }
    const bool improved = selection > state.best_top1;
    if (improved) {
      state.best_top1 = selection;
      state.best_epoch = epoch;
    }
    state.epochs_completed = epoch;
    for (const EpochMetrics& m : records) state.history.push_back(m);

    if (write) {
      for (const EpochMetrics& m : records) log << MetricsToJson(m).dump() << "\n";
      log.flush();
      const Checkpoint ckpt =
          CaptureCheckpoint(model, &state.optimizer, StateToJson(state, config));
      SaveCheckpoint(outputs.dir / kLastCheckpointName, ckpt);
      if (improved) SaveCheckpoint(outputs.dir / kBestCheckpointName, ckpt);
    }
    if (outputs.progress != nullptr) {
      std::ostream& os = *outputs.progress;
      os << "epoch " << epoch << "/" << config.epochs;
      for (const EpochMetrics& m : records) {
        os << "  " << m.split << " loss=" << m.loss << " top1=" << m.top1;
      }
      os << std::endl;
    }
  }
  return state;
}

}  // namespace evframe
