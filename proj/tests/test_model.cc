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


#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "evframe/checkpoint.h"
#include "evframe/error.h"
#include "evframe/model.h"
#include "generators.h"
#include "oracles.h"
#include "temp_dir.h"

namespace evframe {
namespace {

using testing::RandomTensor;
using testing::Uniform;

ModelConfig Toy() {
  ModelConfig c;
  c.input_height = 8;
  c.input_width = 8;
  c.stage_channels = {4, 6};
  c.cbam_stages = {0, 1};
  c.cbam.reduction = 2;
  c.cbam.kernel = 3;
  c.num_classes = 3;
  return c;
}

Tensor Batch(const ModelConfig& c, std::size_t n, std::mt19937_64& rng) {
  Shape s = c.SampleShape();
  s.insert(s.begin(), n);
  return RandomTensor(s, rng, 0.0, 1.0);
}

const LayerCost& Row(const std::vector<LayerCost>& rows, const std::string& name) {
  for (const LayerCost& r : rows) {
    if (r.name == name) return r;
  }
  FAIL("missing row " << name);
  return rows.front();
}

ErrorKind KindOf(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kIo;
}

TEST_SUITE("model") {

TEST_CASE("default network ends on a 512x4x4 map") {
  const std::vector<LayerCost> rows = ProfileModel(ModelConfig{});
  CHECK(Row(rows, "stage5.pool").output == Shape{512, 4, 4});
  CHECK(Row(rows, "head.fc1").output == Shape{10});
}

TEST_CASE("minimal and collapsing configurations") {
  ModelConfig one;
  one.input_height = one.input_width = 8;
  one.stage_channels = {3};
  one.cbam_stages = {0};
  one.cbam.reduction = 2;
  Model m = BuildModel(one, 1);
  std::mt19937_64 rng(1);
  CHECK(m.Forward(Batch(one, 2, rng), Phase::kEval).shape() == Shape{2, 10});

  ModelConfig deep;
  deep.input_height = deep.input_width = 32;
  deep.stage_channels = {4, 4, 4, 4, 4, 4};
  deep.cbam_stages.clear();
  CHECK(KindOf([&] { BuildModel(deep, 1); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("zero batch gives identical finite rows") {
  const ModelConfig c = Toy();
  Model m = BuildModel(c, 5);
  Shape s = c.SampleShape();
  s.insert(s.begin(), 2);
  for (Phase phase : {Phase::kEval, Phase::kTrain}) {
    const Tensor logits = m.Forward(Tensor(s), phase);
    CHECK(logits.AllFinite());
    for (std::size_t k = 0; k < c.num_classes; ++k) CHECK(logits[k] == logits[c.num_classes + k]);
  }
}

TEST_CASE("input shape is checked") {
  Model m = BuildModel(Toy(), 1);
  CHECK(KindOf([&] { m.Forward(Tensor({1, 2, 8, 9}), Phase::kEval); }) == ErrorKind::kShapeMismatch);
}

TEST_CASE("logit mean over identical frames equals one frame") {
  ModelConfig single = Toy();
  ModelConfig multi = single;
  multi.fusion = FrameFusion::kLogitMean;
  multi.frames = 3;
  Model a = BuildModel(single, 11);
  Model b = BuildModel(multi, 12);
  auto pa = a.Parameters();
  auto pb = b.Parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) *pb[i].value = *pa[i].value;
  std::mt19937_64 rng(3);
  const Tensor x = Batch(single, 2, rng);
  Tensor stacked({2, 6, 8, 8});
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 8; ++i)
          for (std::size_t j = 0; j < 8; ++j) stacked.at(n, f * 2 + c, i, j) = x.at(n, c, i, j);
  const Tensor la = a.Forward(x, Phase::kEval), lb = b.Forward(stacked, Phase::kEval);
  for (std::size_t i = 0; i < la.size(); ++i) CHECK(std::abs(la[i] - lb[i]) <= 1e-12);
}

TEST_CASE("seeded initialization is deterministic") {
  Model a = BuildModel(Toy(), 42), b = BuildModel(Toy(), 42), c = BuildModel(Toy(), 43);
  auto pa = a.Parameters(), pb = b.Parameters(), pc = c.Parameters();
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(*pa[i].value == *pb[i].value);
    any_diff |= !(*pa[i].value == *pc[i].value);
  }
  CHECK(any_diff);
}

TEST_CASE("parameter names are unique and stable") {
  Model m = BuildModel(Toy(), 1);
  std::set<std::string> names;
  for (const ParamRef& p : m.Parameters()) CHECK(names.insert(p.name).second);
  CHECK(names.count("stage1.conv1.weight"));
  CHECK(names.count("stage2.bn2.gamma"));
  CHECK(names.count("stage1.cbam.channel.fc1.weight"));
  CHECK(names.count("stage2.cbam.spatial.conv.weight"));
  CHECK(names.count("head.fc1.weight"));
  CHECK_FALSE(names.count("stage1.conv1.bias"));
}

TEST_CASE("single conv parameter count") {
  ModelConfig c;
  c.input_channels = 3;
  c.input_height = c.input_width = 8;
  c.stage_channels = {64};
  c.convs_per_block = 1;
  c.batch_norm = false;
  c.conv_bias = true;
  c.cbam_stages.clear();
  CHECK(Row(ProfileModel(c), "stage1.conv1").params == 1792);
}

TEST_CASE("cbam block parameter count at C=64") {
  ModelConfig c;
  c.input_height = c.input_width = 8;
  c.stage_channels = {64};
  c.cbam_stages = {0};
  CHECK(Row(ProfileModel(c), "stage1.cbam.channel").params +
            Row(ProfileModel(c), "stage1.cbam.spatial").params ==
        679);
}

TEST_CASE("parameter counts agree with the analytic oracle") {
  std::vector<ModelConfig> configs{ModelConfig{}, Toy(), VggOriginalPreset(32, 32, 10)};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    ModelConfig c;
    const std::size_t stages = Uniform(rng, 1, 3);
    c.stage_channels.clear();
    c.cbam_stages.clear();
    for (std::size_t s = 0; s < stages; ++s) {
      c.stage_channels.push_back(Uniform(rng, 1, 24));
      if (rng() & 1) c.cbam_stages.push_back(s);
    }
    c.input_channels = Uniform(rng, 1, 6);
    c.input_height = Uniform(rng, 1 << stages, 20);
    c.input_width = Uniform(rng, 1 << stages, 20);
    c.convs_per_block = Uniform(rng, 1, 3);
    c.batch_norm = rng() & 1;
    c.conv_bias = rng() & 1;
    c.cbam.reduction = Uniform(rng, 1, 20);
    c.cbam.kernel = 2 * Uniform(rng, 0, 3) + 1;
    c.num_classes = Uniform(rng, 1, 12);
    c.head = (rng() & 1) ? HeadKind::kGapLinear : HeadKind::kFlattenMlp;
    if (rng() & 1) c.classifier_hidden = {Uniform(rng, 1, 16)};
    configs.push_back(c);
  }
  for (const ModelConfig& c : configs) {
    Model m = BuildModel(c, 1);
    const std::uint64_t expected = oracle::AnalyticParamCount(c);
    CHECK(CountParams(m) == expected);
    CHECK(m.ParameterCount() == expected);
    std::uint64_t table = 0;
    for (const LayerCost& r : ProfileModel(c)) table += r.params;
    CHECK(table == expected);
  }
}

TEST_CASE("single layer flop formulas") {
  ModelConfig c;
  c.input_channels = 1;
  c.input_height = c.input_width = 4;
  c.stage_channels = {1};
  c.convs_per_block = 1;
  c.batch_norm = false;
  c.conv_bias = false;
  c.cbam_stages.clear();
  c.num_classes = 1;
  const auto rows = ProfileModel(c);
  CHECK(Row(rows, "stage1.conv1").flops == 2 * 1 * 1 * 9 * 16);
  CHECK(Row(rows, "stage1.relu1").flops == 16);
  CHECK(Row(rows, "stage1.pool").flops == 16);

  c.conv_bias = true;
  CHECK(Row(ProfileModel(c), "stage1.conv1").flops == 2 * 9 * 16 + 16);

  ModelConfig head;
  head.input_height = head.input_width = 8;
  head.stage_channels = {512};
  head.convs_per_block = 1;
  head.cbam_stages.clear();
  head.num_classes = 10;
  CHECK(Row(ProfileModel(head), "head.fc1").flops == 2 * 512 * 10 + 10);
  CHECK(Row(ProfileModel(head), "stage1.bn1").flops == 2 * 512 * 64);
}

TEST_CASE("two versus three input channels on the default model") {
  ModelConfig two;
  ModelConfig three = two;
  three.input_channels = 3;
  const auto a = ProfileModel(two), b = ProfileModel(three);
  CHECK(Row(b, "stage1.conv1").flops - Row(a, "stage1.conv1").flops == 2ull * 64 * 9 * 128 * 128);
  Model m = BuildModel(two, 1);
  double total = 0;
  for (const LayerCost& r : a) total += static_cast<double>(r.flops);
  CHECK(CountMegaFlops(m, two.SampleShape()) == doctest::Approx(total / 1e6).epsilon(1e-15));
}

TEST_CASE("delta report lists both networks") {
  ModelConfig framework;
  framework.input_height = framework.input_width = 32;
  const std::string report =
      FormatCostDelta(ProfileModel(VggOriginalPreset(32, 32, 10)), ProfileModel(framework),
                      "vgg-original", "framework");
  CHECK(report.find("vgg-original") != std::string::npos);
  CHECK(report.find("stage1.conv1") != std::string::npos);
  CHECK(report.find("head.fc3") != std::string::npos);
  CHECK(report.find("stage1.cbam.channel") != std::string::npos);
  CHECK(FormatCostTable(ProfileModel(framework)).find("total") != std::string::npos);
}

TEST_CASE("config json round trip and strictness") {
  ModelConfig c = Toy();
  c.head = HeadKind::kFlattenMlp;
  c.classifier_hidden = {7};
  c.cbam.order = attention::CbamOrder::kSpatialFirst;
  const ModelConfig back = ModelConfigFromJson(ModelConfigToJson(c));
  CHECK(ModelConfigToJson(back) == ModelConfigToJson(c));
  CHECK(ModelConfigDigest(back) == ModelConfigDigest(c));
  c.num_classes = 4;
  CHECK(ModelConfigDigest(back) != ModelConfigDigest(c));

  nlohmann::json j = ModelConfigToJson(back);
  j["dropout"] = 0.5;
  try {
    ModelConfigFromJson(j);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidConfig);
    CHECK(std::string(e.what()).find("model.dropout") != std::string::npos);
  }
  // conv_bias follows batch_norm when absent.
  CHECK(ModelConfigFromJson({{"batch_norm", false}}).conv_bias);
  CHECK_FALSE(ModelConfigFromJson(nlohmann::json::object()).conv_bias);
}

TEST_CASE("checkpoint round trip reproduces logits") {
  const ModelConfig c = Toy();
  Model m = BuildModel(c, 7);
  std::mt19937_64 rng(7);
  const Tensor x = Batch(c, 4, rng);
  m.Forward(x, Phase::kTrain);  // moves the running statistics
  AdamState opt = MakeAdamState(m.Parameters());
  opt.step = 3;
  opt.first_moment[0][0] = 0.25;
  const Tensor before = m.Forward(x, Phase::kEval);

  testing::TempDir dir("ckpt");
  SaveCheckpoint(dir / "m.ckpt", CaptureCheckpoint(m, &opt, {{"epoch", 3}}));
  const Checkpoint ck = LoadCheckpoint(dir / "m.ckpt");
  CHECK(ck.state["epoch"] == 3);
  CHECK(EncodeCheckpoint(ck) == ReadFileBytes(dir / "m.ckpt"));

  Model restored = BuildModel(c, 99);
  AdamState opt2 = MakeAdamState(restored.Parameters());
  RestoreCheckpoint(ck, restored, &opt2);
  CHECK(restored.Forward(x, Phase::kEval) == before);
  CHECK(opt2.first_moment[0][0] == 0.25);

  ModelConfig other = c;
  other.num_classes = 4;
  Model wrong = BuildModel(other, 1);
  CHECK(KindOf([&] { RestoreCheckpoint(ck, wrong, nullptr); }) == ErrorKind::kConfigDigestMismatch);

  Bytes bytes = EncodeCheckpoint(ck);
  bytes[0] = 'Z';
  CHECK(KindOf([&] { DecodeCheckpoint(bytes); }) == ErrorKind::kBadMagic);
  bytes = EncodeCheckpoint(ck);
  bytes[9] ^= 1;  // digest byte
  CHECK(KindOf([&] { DecodeCheckpoint(bytes); }) == ErrorKind::kConfigDigestMismatch);
  bytes = EncodeCheckpoint(ck);
  bytes.resize(bytes.size() - 4);
  CHECK(KindOf([&] { DecodeCheckpoint(bytes); }) == ErrorKind::kTruncatedRecord);
}

}  // TEST_SUITE

}  // namespace
}  // namespace evframe
