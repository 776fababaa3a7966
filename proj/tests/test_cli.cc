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


#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evframe/byte_io.h"
#include "evframe/cli.h"
#include "evframe/train.h"
#include "json.hpp"
#include "temp_dir.h"

namespace evframe {
namespace {

using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Run(std::vector<std::string> args) {
  args.insert(args.begin(), "evframe");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string ReadText(const std::filesystem::path& p) {
  const Bytes b = ReadFileBytes(p);
  return std::string(b.begin(), b.end());
}

nlohmann::json ToyConfig(const TempDir& dir, const std::string& output) {
  return {
      {"data", {{"root", (dir / "frames").string()}, {"train_fraction", 0.75}}},
      {"model", {{"stage_channels", {4, 8}}, {"cbam", {{"reduction", 2}, {"kernel", 3}}}}},
      {"train", {{"lr", 0.002}, {"batch_size", 16}, {"epochs", 3}, {"deterministic", true}}},
      {"output_dir", (dir / output).string()},
      {"seed", 3},
  };
}

// Generates and converts a small moving-bar corpus once per test.
void Prepare(const TempDir& dir) {
  REQUIRE(Run({"synth", "--out", (dir / "raw").string(), "--per-class", "6", "--width", "12",
               "--height", "12"})
              .code == kExitOk);
  const Result c = Run({"convert", (dir / "raw").string(), "--format", "evt", "-T", "3", "--out",
                        (dir / "frames").string()});
  REQUIRE(c.code == kExitOk);
  CHECK(c.out.find("converted 12 of 12") != std::string::npos);
}

TEST_SUITE("cli") {

TEST_CASE("exit code table") {
  CHECK(ExitCodeFor(ErrorKind::kInvalidArgument) == kExitUsage);
  CHECK(ExitCodeFor(ErrorKind::kInvalidConfig) == kExitConfig);
  CHECK(ExitCodeFor(ErrorKind::kConfigDigestMismatch) == kExitConfig);
  CHECK(ExitCodeFor(ErrorKind::kIo) == kExitIo);
  CHECK(ExitCodeFor(ErrorKind::kTruncatedRecord) == kExitData);
  CHECK(ExitCodeFor(ErrorKind::kEmptyDataset) == kExitData);
  const std::vector<int> distinct{kExitOk, kExitUsage, kExitConfig, kExitIo, kExitData};
  CHECK(std::set<int>(distinct.begin(), distinct.end()).size() == 5);
}

TEST_CASE("usage errors") {
  CHECK(Run({}).code == kExitUsage);
  CHECK(Run({"frobnicate"}).code == kExitUsage);
  CHECK(Run({"convert", "x", "--slice-mode", "sometimes"}).code == kExitUsage);
  CHECK(Run({"--help"}).code == kExitOk);
}

TEST_CASE("train, evaluate and inspect a converted corpus") {
  TempDir dir("cli");
  Prepare(dir);
  WriteTextFile(dir / "run.json", ToyConfig(dir, "run").dump(2));

  const Result t = Run({"train", "--config", (dir / "run.json").string()});
  REQUIRE_MESSAGE(t.code == kExitOk, t.err);
  for (const char* f : {"metrics.ndjson", "last.ckpt", "best.ckpt", "split.tsv", "resolved_config.json"}) {
    CHECK(std::filesystem::exists(dir.path() / "run" / f));
  }

  // Eval on the train split reproduces the final logged train accuracy.
  const Result e = Run({"eval", "--ckpt", (dir / "run/last.ckpt").string(), "--data",
                        (dir / "frames").string(), "--config", (dir / "run.json").string(),
                        "--split", "train"});
  REQUIRE_MESSAGE(e.code == kExitOk, e.err);
  std::istringstream log(ReadText(dir.path() / "run" / "metrics.ndjson"));
  std::string line;
  double final_train = -1;
  while (std::getline(log, line)) {
    const EpochMetrics m = MetricsFromJson(nlohmann::json::parse(line));
    if (m.split == "train") final_train = m.top1;
  }
  std::ostringstream expected;
  expected << "top1:     " << final_train << " (";
  CHECK(e.out.find(expected.str()) != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "run" / "confusion.txt"));

  // Rerunning the same config rewrites identical bytes.
  const std::string first = ReadText(dir.path() / "run" / "last.ckpt");
  REQUIRE(Run({"train", "--config", (dir / "run.json").string()}).code == kExitOk);
  CHECK(ReadText(dir.path() / "run" / "last.ckpt") == first);

  // A config for another architecture does not match the checkpoint.
  nlohmann::json other = ToyConfig(dir, "run");
  other["model"]["stage_channels"] = {4, 4};
  WriteTextFile(dir / "other.json", other.dump());
  const Result mismatch = Run({"eval", "--ckpt", (dir / "run/last.ckpt").string(), "--data",
                               (dir / "frames").string(), "--config", (dir / "other.json").string()});
  CHECK(mismatch.code == kExitConfig);
  CHECK(mismatch.err.find("ConfigDigestMismatch") != std::string::npos);

  std::filesystem::path frame_file;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "frames")) {
    if (entry.path().extension() == ".frm") frame_file = entry.path();
  }
  const Result frm = Run({"inspect", frame_file.string()});
  CHECK(frm.code == kExitOk);
  CHECK(frm.out.find("slice 2") != std::string::npos);
}

TEST_CASE("config and data errors") {
  TempDir dir("cli-errors");
  nlohmann::json cfg = ToyConfig(dir, "run");
  WriteTextFile(dir / "missing.json", cfg.dump());
  const Result missing = Run({"train", "--config", (dir / "missing.json").string()});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("data.root") != std::string::npos);

  cfg["train"]["warmup"] = 5;
  std::filesystem::create_directories(dir / "frames");
  WriteTextFile(dir / "unknown.json", cfg.dump());
  const Result unknown = Run({"train", "--config", (dir / "unknown.json").string()});
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("train.warmup") != std::string::npos);

  CHECK(Run({"train", "--config", (dir / "absent.json").string()}).code != kExitOk);
  CHECK(Run({"inspect", (dir / "nothing.evt").string()}).code == kExitIo);
}

TEST_CASE("truncated input names the byte offset") {
  TempDir dir("cli-trunc");
  REQUIRE(Run({"synth", "--out", (dir / "raw").string(), "--per-class", "1"}).code == kExitOk);
  std::filesystem::path file;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "raw")) {
    if (entry.path().extension() == ".evt") file = entry.path();
  }
  REQUIRE_FALSE(file.empty());
  Bytes bytes = ReadFileBytes(file);
  bytes.resize(26 + 2 * 13 + 5);
  WriteFileBytes(file, bytes);
  const Result r = Run({"inspect", file.string()});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("byte offset 52") != std::string::npos);

  const Result c = Run({"convert", (dir / "raw").string(), "--format", "evt", "-T", "2", "--out",
                        (dir / "frames").string()});
  CHECK(c.code == kExitData);
  CHECK(c.err.find("1 file(s) failed") != std::string::npos);
  CHECK(ReadText(dir.path() / "frames" / "manifest.tsv").find("# status=partial") != std::string::npos);
}

TEST_CASE("empty evaluation set") {
  TempDir dir("cli-empty");
  Prepare(dir);
  WriteTextFile(dir / "run.json", ToyConfig(dir, "run").dump());
  REQUIRE(Run({"train", "--config", (dir / "run.json").string()}).code == kExitOk);
  // A converted directory whose every entry failed.
  std::filesystem::create_directories(dir / "bad/a");
  WriteTextFile(dir / "bad/a/x.evt", "garbage");
  Run({"convert", (dir / "bad").string(), "--format", "evt", "-T", "3", "--out", (dir / "empty").string()});
  const Result e = Run({"eval", "--ckpt", (dir / "run/last.ckpt").string(), "--data",
                        (dir / "empty").string(), "--config", (dir / "run.json").string()});
  INFO(e.err);
  CHECK(e.code == kExitData);
  CHECK(e.err.find("EmptyDataset") != std::string::npos);
}

TEST_CASE("account prints a delta report") {
  const Result r = Run({"account", "--height", "32", "--width", "32", "--classes", "10"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("stage1.conv1") != std::string::npos);
  CHECK(r.out.find("head.fc3") != std::string::npos);
  CHECK(r.out.find("%") != std::string::npos);
}

}  // TEST_SUITE

}  // namespace
}  // namespace evframe
