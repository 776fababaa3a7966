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


// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "evframe/attention.h"
#include "evframe/byte_io.h"
#include "evframe/cli.h"
#include "evframe/codec.h"
#include "evframe/dataset.h"
#include "evframe/model.h"
#include "evframe/parallel.h"
#include "evframe/representation.h"
#include "evframe/synthetic.h"
#include "evframe/train.h"
#include "generators.h"
#include "gradient_cases.h"
#include "oracles.h"
#include "temp_dir.h"

namespace evframe {
namespace {

using Clock = std::chrono::steady_clock;
using testing::RandomTensor;
using testing::Uniform;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only, so the detail stays readable.
  void Require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- 1: frame integration ---------------------------------------------------

Outcome FrameIntegration() {
  Outcome o;
  const std::size_t kStreams = 120;
  const std::size_t slice_counts[] = {1, 5, 20};
  for (std::size_t i = 0; i < kStreams; ++i) {
    std::mt19937_64 rng(1000 + i);
    const SensorGeometry g = testing::RandomGeometry(rng, 128);
    const std::size_t t = slice_counts[i % 3];
    const EventStream s = testing::RandomStream(rng, Uniform(rng, 100, 50000), g);
    for (SliceMode mode : {SliceMode::kStrict, SliceMode::kRemainderToLast}) {
      const bool remainder = mode == SliceMode::kRemainderToLast;
      const FrameTensor f = IntegrateFrames(s, SliceByCount(s.size(), t, mode));
      const auto expected = oracle::IntegrateByCounting(s, t, remainder);
      o.Require(std::equal(f.counts().begin(), f.counts().end(), expected.begin(), expected.end()),
                "oracle mismatch on stream " + std::to_string(i));
      const std::uint64_t covered = remainder ? s.size() : s.size() / t * t;
      o.Require(f.Total() == covered, "conservation violated on stream " + std::to_string(i));
    }
  }
  if (o.pass) o.detail = std::to_string(kStreams) + " streams x 2 slice modes";
  return o;
}

// ---- 2: codecs ----------------------------------------------------------------

Outcome Codecs() {
  Outcome o;
  const std::size_t kRoundTrips = 1000;
  for (std::size_t i = 0; i < kRoundTrips; ++i) {
    std::mt19937_64 rng(2000 + i);
    EventStream s = testing::RandomStream(rng, Uniform(rng, 0, 2000),
                                          testing::RandomGeometry(rng, 2048),
                                          Uniform(rng, 0, std::uint64_t{1} << 24));
    if (rng() & 1) s.label = static_cast<std::int32_t>(Uniform(rng, 0, 1000));
    o.Require(DecodePortable(EncodePortable(s)) == s, "portable round trip " + std::to_string(i));
  }
  const std::size_t kFixtures = 100;
  for (std::size_t i = 0; i < kFixtures; ++i) {
    std::mt19937_64 rng(3000 + i);
    const std::size_t n = Uniform(rng, 1, 1000);
    Bytes atis;
    std::string header = "#!AER-DAT2.0\r\n# fixture\r\n";
    Bytes aedat(header.begin(), header.end());
    std::vector<std::uint64_t> raw23, raw32;
    std::vector<Event> want_atis, want_aedat;
    std::uint64_t t23 = Uniform(rng, 0, (1u << 23) - 1), t32 = Uniform(rng, 0, 0xFFFFFFFFu);
    for (std::size_t k = 0; k < n; ++k) {
      t23 = (t23 + Uniform(rng, 0, 1u << 20)) % (1u << 23);
      t32 = (t32 + Uniform(rng, 0, std::uint64_t{1} << 29)) % (std::uint64_t{1} << 32);
      const auto x = static_cast<std::uint32_t>(Uniform(rng, 0, 127));
      const auto y = static_cast<std::uint32_t>(Uniform(rng, 0, 127));
      const auto p = static_cast<std::uint8_t>(rng() & 1);
      oracle::AppendAtisRecord(atis, static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), p,
                               static_cast<std::uint32_t>(t23));
      oracle::AppendAedatRecord(aedat, x, y, p, static_cast<std::uint32_t>(t32));
      raw23.push_back(t23);
      raw32.push_back(t32);
      want_atis.push_back({x, y, 0, p});
      want_aedat.push_back({x, y, 0, p});
    }
    const auto u23 = oracle::UnwrapScalar(raw23, std::uint64_t{1} << 23);
    const auto u32 = oracle::UnwrapScalar(raw32, std::uint64_t{1} << 32);
    for (std::size_t k = 0; k < n; ++k) {
      want_atis[k].t = u23[k];
      want_aedat[k].t = u32[k];
    }
    o.Require(DecodeAtisBin(atis, kAtisGeometry).events == want_atis,
              "ATIS fixture " + std::to_string(i));
    o.Require(DecodeAedat2(aedat).events == want_aedat, "AEDAT2 fixture " + std::to_string(i));
  }
  if (o.pass) {
    o.detail = std::to_string(kRoundTrips) + " portable round trips, " + std::to_string(kFixtures) +
               " ATIS and " + std::to_string(kFixtures) + " AEDAT2 fixtures";
  }
  return o;
}

// ---- 3: gradients -----------------------------------------------------------

Outcome Gradients() {
  Outcome o;
  const auto start = Clock::now();
  for (const testing::GradientCase& c : testing::AllGradientCases()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const GradCheckResult r = c.run(seed);
      o.Require(r.max_rel_error < c.tolerance,
                c.name + " seed " + std::to_string(seed) + " rel. error " +
                    std::to_string(r.max_rel_error));
    }
  }
  const double secs = Seconds(start);
  o.Require(secs < 300.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu cases x 20 seeds in %.1f s",
                  testing::AllGradientCases().size(), secs);
    o.detail = buf;
  }
  return o;
}

// ---- 4: attention invariants ---------------------------------------------------

Outcome AttentionInvariants() {
  Outcome o;
  const std::size_t kInputs = 120;
  for (std::size_t i = 0; i < kInputs; ++i) {
    std::mt19937_64 rng(4000 + i);
    attention::CbamOptions options;
    options.reduction = Uniform(rng, 1, 16);
    options.kernel = 2 * Uniform(rng, 0, 3) + 1;
    options.order = (rng() & 1) ? attention::CbamOrder::kChannelFirst
                                : attention::CbamOrder::kSpatialFirst;
    const std::size_t c = Uniform(rng, 1, 32);
    const Tensor x =
        RandomTensor({Uniform(rng, 1, 3), c, Uniform(rng, 1, 12), Uniform(rng, 1, 12)}, rng, -5, 5);
    attention::CbamParams p = attention::MakeCbamParams(c, options);
    const Tensor quarter = attention::CbamForward(x, p, options);
    bool exact = quarter.shape() == x.shape();
    for (std::size_t k = 0; exact && k < x.size(); ++k) exact = quarter[k] == x[k] / 4.0;
    o.Require(exact, "zero-parameter block is not input/4 on input " + std::to_string(i));

    for (Tensor* t : {&p.channel.fc1_weight, &p.channel.fc1_bias, &p.channel.fc2_weight,
                      &p.channel.fc2_bias, &p.spatial.conv_weight, &p.spatial.conv_bias}) {
      *t = RandomTensor(t->shape(), rng, -2, 2);
    }
    attention::CbamCache cache;
    const Tensor y = attention::CbamForward(x, p, options, &cache);
    o.Require(y.shape() == x.shape(), "shape changed on input " + std::to_string(i));
    for (double g : cache.channel.gate.values()) {
      o.Require(g > 0.0 && g < 1.0, "channel gate outside (0,1) on input " + std::to_string(i));
    }
    for (double g : cache.spatial.gate.values()) {
      o.Require(g > 0.0 && g < 1.0, "spatial gate outside (0,1) on input " + std::to_string(i));
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      o.Require(std::abs(y[k]) <= std::abs(x[k]), "amplified element on input " + std::to_string(i));
    }
  }
  if (o.pass) o.detail = std::to_string(kInputs) + " random inputs";
  return o;
}

// ---- 5: accounting ----------------------------------------------------------

const LayerCost* FindRow(const std::vector<LayerCost>& rows, const std::string& name) {
  for (const LayerCost& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Outcome Accounting() {
  Outcome o;
  std::vector<ModelConfig> configs;
  configs.push_back(ModelConfig{});
  configs.push_back(VggOriginalPreset(128, 128, 10));
  {
    ModelConfig c;
    c.input_height = c.input_width = 16;
    c.stage_channels = {8, 16};
    c.cbam_stages = {0, 1};
    c.cbam.reduction = 4;
    c.num_classes = 2;
    configs.push_back(c);
  }
  {
    ModelConfig c;
    c.input_channels = 40;
    c.input_height = 48;
    c.input_width = 64;
    c.stage_channels = {32, 64, 128};
    c.convs_per_block = 3;
    c.cbam_stages = {1};
    c.cbam.kernel = 5;
    c.num_classes = 101;
    c.head = HeadKind::kFlattenMlp;
    c.classifier_hidden = {256};
    configs.push_back(c);
  }
  {
    ModelConfig c;
    c.input_height = c.input_width = 32;
    c.stage_channels = {64, 128, 256};
    c.cbam_stages = {0, 1, 2};
    c.batch_norm = false;
    c.conv_bias = true;
    c.cbam.reduction = 16;
    c.cbam.residual = true;
    c.fusion = FrameFusion::kLogitMean;
    c.frames = 5;
    configs.push_back(c);
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Model m = BuildModel(configs[i], 1);
    o.Require(CountParams(m) == oracle::AnalyticParamCount(configs[i]),
              "parameter count differs on config " + std::to_string(i));
  }

  // Single-layer FLOP formulas.
  ModelConfig one;
  one.input_channels = 3;
  one.input_height = one.input_width = 8;
  one.stage_channels = {5};
  one.convs_per_block = 1;
  one.conv_bias = true;
  one.cbam_stages.clear();
  one.num_classes = 7;
  const auto rows = ProfileModel(one);
  auto flops = [&](const char* name) { return FindRow(rows, name) ? FindRow(rows, name)->flops : 0; };
  o.Require(flops("stage1.conv1") == 2ull * 5 * 3 * 9 * 64 + 5 * 64, "conv FLOPs");
  o.Require(flops("stage1.bn1") == 2ull * 5 * 64, "batchnorm FLOPs");
  o.Require(flops("stage1.relu1") == 5ull * 64, "relu FLOPs");
  o.Require(flops("stage1.pool") == 4ull * 5 * 16, "pool FLOPs");
  o.Require(flops("head.gap") == 5ull * 16, "global pool FLOPs");
  o.Require(flops("head.fc1") == 2ull * 5 * 7 + 7, "linear FLOPs");

  // First-conv delta between 2 and 3 input channels on the default network.
  ModelConfig three;
  three.input_channels = 3;
  const auto a = ProfileModel(ModelConfig{}), b = ProfileModel(three);
  o.Require(FindRow(b, "stage1.conv1")->flops - FindRow(a, "stage1.conv1")->flops ==
                2ull * 64 * 9 * 128 * 128,
            "2-vs-3 channel conv delta");

  // Delta report: original-head 3-channel preset against the framework.
  ModelConfig framework;
  framework.input_height = framework.input_width = 128;
  ModelConfig baseline = VggOriginalPreset(128, 128, 10);
  baseline.stage_channels = framework.stage_channels;
  const std::string report = FormatCostDelta(ProfileModel(baseline), ProfileModel(framework),
                                             "vgg original (3ch)", "framework (2ch)");
  o.Require(report.find("stage1.conv1") != std::string::npos &&
                report.find("head.fc3") != std::string::npos &&
                report.find("stage1.cbam.channel") != std::string::npos,
            "delta report is missing layers");
  if (o.pass) {
    o.detail = std::to_string(configs.size()) + " configs, 6 layer formulas, delta report ok";
  }
  return o;
}

// ---- 6: learning on moving bars ----------------------------------------------

Outcome Learning() {
  Outcome o;
  const auto start = Clock::now();
  MovingBarOptions bars;  // 2 classes x 32 streams, 16 x 16
  const std::vector<LabelledStream> streams = GenerateMovingBarDataset(bars);
  RepresentationConfig rep;
  rep.slices = 4;
  InMemoryDataset data({2, bars.height, bars.width}, 2);
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const FrameTensor f =
        IntegrateFrames(streams[i].stream, SliceByCount(streams[i].stream.size(), rep.slices, rep.slice_mode));
    data.Add(rep.Prepare(f), streams[i].label, std::to_string(i));
  }
  const Split split = MakeSplit(data, 0.75, MixSeed(1, 1));
  const SubsetDataset train(data, split.train), test(data, split.test);

  ModelConfig config;
  config.input_height = bars.height;
  config.input_width = bars.width;
  config.stage_channels = {8, 16};
  config.cbam_stages = {0, 1};
  config.cbam.reduction = 4;
  config.num_classes = 2;
  Model model = BuildModel(config, 1);

  const double initial = Evaluate(model, train, 64).loss;
  o.Require(std::abs(initial - std::log(2.0)) <= 0.05 * std::log(2.0),
            "initial loss " + std::to_string(initial));

  TrainConfig tc;
  tc.adam.lr = 1e-3;
  tc.batch_size = 16;
  tc.epochs = 200;
  tc.seed = 1;
  tc.deterministic = true;
  const TrainState st = Train(model, train, &test, tc);
  std::size_t reached = 0;
  double train_top1 = 0.0;
  for (std::size_t i = 0; i + 1 < st.history.size() && reached == 0; ++i) {
    const EpochMetrics& m = st.history[i];
    if (m.split == "train") train_top1 = m.top1;
    if (m.split == "test" && train_top1 >= 0.95 && m.top1 >= 0.90) reached = m.epoch;
  }
  const EpochMetrics& last = st.history.back();
  if (reached == 0 && last.split == "test" && train_top1 >= 0.95 && last.top1 >= 0.90) {
    reached = last.epoch;
  }
  o.Require(reached > 0, "targets not reached in 200 epochs");
  const double secs = Seconds(start);
  o.Require(secs < 600.0, "took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "initial loss %.4f (ln 2 = %.4f), train >= 95%% and held-out >= 90%% at epoch %zu, "
                  "%zu/%zu split, %.1f s",
                  initial, std::log(2.0), reached, train.size(), test.size(), secs);
    o.detail = buf;
  }
  return o;
}

// ---- 7: determinism -----------------------------------------------------------

int Cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "evframe");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

Outcome Determinism() {
  Outcome o;
  testing::TempDir dir("accept-det");
  std::string err;
  o.Require(Cli({"synth", "--out", (dir / "raw").string()}, &err) == kExitOk, "synth: " + err);
  o.Require(Cli({"convert", (dir / "raw").string(), "--format", "evt", "-T", "4", "--out",
                 (dir / "frames").string()},
                &err) == kExitOk,
            "convert: " + err);
  const Bytes toy = ReadFileBytes(std::filesystem::path(EVFRAME_SOURCE_DIR) / "configs" / "toy.json");
  nlohmann::json config = nlohmann::json::parse(toy.begin(), toy.end());
  config["data"]["root"] = (dir / "frames").string();
  for (const char* run : {"a", "b"}) {
    config["output_dir"] = (dir / run).string();
    WriteTextFile(dir / (std::string(run) + ".json"), config.dump(2));
    o.Require(Cli({"train", "--config", (dir / (std::string(run) + ".json")).string()}, &err) == kExitOk,
              std::string("train ") + run + ": " + err);
  }
  for (const char* f : {kMetricsFileName, kLastCheckpointName, kBestCheckpointName, "split.tsv"}) {
    if (!o.pass) break;
    o.Require(ReadFileBytes(dir.path() / "a" / f) == ReadFileBytes(dir.path() / "b" / f),
              std::string(f) + " differs between runs");
  }
  if (o.pass) {
    o.detail = "toy config, " + std::to_string(config["train"]["epochs"].get<int>()) +
               " epochs twice: metrics log and checkpoints bit-identical";
  }
  return o;
}

}  // namespace
}  // namespace evframe

int main() {
  using namespace evframe;
  SetWorkerThreads(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"frame integration equals counting oracle", FrameIntegration},
      {"codec round trip and fixtures", Codecs},
      {"finite-difference gradients", Gradients},
      {"attention invariants", AttentionInvariants},
      {"parameter and FLOP accounting", Accounting},
      {"moving-bar learning sanity", Learning},
      {"single-threaded determinism", Determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first
              << " (" << o.detail << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
