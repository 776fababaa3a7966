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


#include "evframe/cli.h"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "evframe/byte_io.h"
#include "evframe/checkpoint.h"
#include "evframe/codec.h"
#include "evframe/convert.h"
#include "evframe/dataset.h"
#include "evframe/model.h"
#include "evframe/representation.h"
#include "evframe/run_config.h"
#include "evframe/synthetic.h"
#include "evframe/train.h"

namespace evframe {

namespace fs = std::filesystem;

namespace {

constexpr char kSplitFileName[] = "split.tsv";
constexpr char kConfusionFileName[] = "confusion.txt";
constexpr char kResolvedConfigName[] = "resolved_config.json";

const std::vector<std::string> kFormats{"atis-bin", "aedat2", "evt"};
const std::vector<std::string> kSliceModes{"strict", "remainder"};
const std::vector<std::string> kReduces{"mean", "sum", "stack"};
const std::vector<std::string> kNorms{"none", "max", "log1p"};

struct ConvertArgs {
  std::string input, output, format, slice_mode = "remainder", reduce = "mean", normalize = "max";
  std::size_t slices = 20;
  std::uint32_t atis_width = kAtisGeometry.width, atis_height = kAtisGeometry.height;
  bool flip_polarity = false;
};

struct InspectArgs {
  std::string file, format;
};

struct TrainArgs {
  std::string config, resume;
};

struct EvalArgs {
  std::string ckpt, data, config, split = "all", split_file, out;
};

struct AccountArgs {
  std::string config;
  std::size_t height = 128, width = 128, classes = 10;
};

struct SynthArgs {
  std::string out;
  std::size_t per_class = 32;
  std::uint32_t width = 16, height = 16;
  std::uint64_t seed = 1;
};

int Convert(const ConvertArgs& a, std::ostream& out, std::ostream& err) {
  ConvertOptions o;
  o.input = a.input;
  o.output = a.output;
  if (!a.format.empty()) o.format = ParseEventFormat(a.format);
  o.representation.slices = a.slices;
  o.representation.slice_mode = ParseSliceMode(a.slice_mode);
  o.representation.reduce = ParseTemporalReduce(a.reduce);
  o.representation.normalize = ParseNormalization(a.normalize);
  o.atis_geometry = {a.atis_width, a.atis_height};
  o.flip_polarity = a.flip_polarity;
  const ConvertReport report = ConvertDataset(o);
  const std::size_t total = report.manifest.entries.size();
  out << "converted " << report.converted << " of " << total << " files into " << a.output
      << " (" << report.manifest.classes.size() << " classes, T=" << a.slices << ")\n";
  if (report.failures.empty()) return kExitOk;
  err << report.failures.size() << " file(s) failed; manifest marked partial\n";
  for (const ConvertFailure& f : report.failures) err << "  " << f.source << ": " << f.message << "\n";
  return kExitData;
}

int InspectFrames(const fs::path& path, std::ostream& out) {
  const FrameTensor frames = ReadFrameFile(path);
  out << "file:      " << path.string() << "\n"
      << "format:    frm\n"
      << "shape:     " << ShapeToString(frames.shape()) << " (T x C x H x W)\n"
      << "slices:    " << frames.slices() << "\n"
      << "channels:  " << FrameTensor::kChannels << "\n"
      << "geometry:  " << frames.width() << "x" << frames.height() << "\n"
      << "total:     " << frames.Total() << "\n"
      << "off (p=0): " << frames.ChannelTotal(0) << "\n"
      << "on (p=1):  " << frames.ChannelTotal(1) << "\n"
      << "per-slice totals:\n";
  for (std::size_t n = 0; n < frames.slices(); ++n) {
    out << "  slice " << n << ": " << frames.SliceTotal(n) << "\n";
  }
  return kExitOk;
}

int Inspect(const InspectArgs& a, std::ostream& out) {
  const fs::path path = a.file;
  if (a.format.empty() && path.extension() == ".frm") return InspectFrames(path, out);
  const std::optional<EventFormat> format =
      a.format.empty() ? FormatFromExtension(path) : std::optional(ParseEventFormat(a.format));
  if (!format) {
    throw Error(ErrorKind::kInvalidArgument,
                "cannot infer the format of " + path.string() + "; pass --format");
  }
  const EventStream stream = ReadEventFile(path, *format);
  const StreamStats s = ComputeStreamStats(stream);
  out << "file:      " << path.string() << "\n"
      << "format:    " << EventFormatName(*format) << "\n"
      << "geometry:  " << stream.geometry.width << "x" << stream.geometry.height << "\n";
  if (stream.label) out << "label:     " << *stream.label << "\n";
  out << "count:     " << s.count << "\n"
      << "first t:   " << stream.events.front().t << " us\n"
      << "duration:  " << s.duration_us << " us\n"
      << "on (p=1):  " << s.on_count << "\n"
      << "off (p=0): " << s.off_count << "\n"
      << "on ratio:  " << std::fixed << std::setprecision(4)
      << static_cast<double>(s.on_count) / static_cast<double>(s.count) << "\n"
      << "x range:   [" << s.min_x << ", " << s.max_x << "]\n"
      << "y range:   [" << s.min_y << ", " << s.max_y << "]\n";
  return kExitOk;
}

int TrainCommand(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig run = LoadRunConfig(a.config);
  if (run.data.auto_convert && !fs::exists(run.data.root / kManifestFileName)) {
    ConvertOptions o;
    o.input = run.data.raw;
    o.output = run.data.root;
    o.format = run.data.format;
    o.representation = run.representation.value_or(RepresentationConfig{});
    const ConvertReport report = ConvertDataset(o);
    out << "auto-converted " << report.converted << " of " << report.manifest.entries.size()
        << " files into " << run.data.root.string() << "\n";
    for (const ConvertFailure& f : report.failures) {
      err << "  skipped " << f.source << ": " << f.message << "\n";
    }
  }
  const Manifest manifest = ReadManifest(run.data.root);
  if (!manifest.complete()) err << "warning: " << run.data.root.string() << " is a partial conversion\n";
  const RepresentationConfig rep = EffectiveRepresentation(run, manifest);
  const FrameDataset dataset(run.data.root, rep);
  if (dataset.size() == 0) {
    throw Error(ErrorKind::kEmptyDataset, "no converted samples in " + run.data.root.string());
  }
  const ModelConfig model_config = ResolveModelConfig(run, manifest);
  const Split split = MakeSplit(dataset, run.data.train_fraction, MixSeed(run.seed, 1));
  fs::create_directories(run.output_dir);
  WriteTextFile(run.output_dir / kSplitFileName, FormatSplit(dataset, split));
  nlohmann::json resolved = {
      {"representation",
       {{"slices", rep.slices},
        {"slice_mode", SliceModeName(rep.slice_mode)},
        {"reduce", TemporalReduceName(rep.reduce)},
        {"normalize", NormalizationName(rep.normalize)}}},
      {"model", ModelConfigToJson(model_config)},
      {"train", TrainConfigToJson(run.train)},
      {"seed", run.seed},
  };
  WriteTextFile(run.output_dir / kResolvedConfigName, resolved.dump(2) + "\n");

  Model model = BuildModel(model_config, run.seed);
  const SubsetDataset train(dataset, split.train);
  const SubsetDataset test(dataset, split.test);
  out << "training on " << train.size() << " samples, testing on " << test.size() << "; "
      << CountParams(model) << " parameters\n";
  TrainOutputs outputs;
  outputs.dir = run.output_dir;
  outputs.resume = a.resume;
  outputs.progress = &out;
  const TrainState state = Train(model, train, &test, run.train, outputs);
  out << "best top1 " << state.best_top1 << " at epoch " << state.best_epoch << "; artifacts in "
      << run.output_dir.string() << "\n";
  return kExitOk;
}

int EvalCommand(const EvalArgs& a, std::ostream& out) {
  const RunConfig run = LoadRunConfig(a.config, /*check_paths=*/false);
  if (!fs::is_directory(a.data)) throw Error(ErrorKind::kIo, "not a directory: " + a.data);
  if (!fs::exists(fs::path(a.data) / kManifestFileName)) {
    throw Error(ErrorKind::kEmptyDataset, "no converted samples in " + a.data);
  }
  const Manifest manifest = ReadManifest(a.data);
  const FrameDataset dataset(a.data, EffectiveRepresentation(run, manifest));
  if (dataset.size() == 0) throw Error(ErrorKind::kEmptyDataset, "no converted samples in " + a.data);
  const ModelConfig model_config = ResolveModelConfig(run, manifest);

  Model model(model_config);
  RestoreCheckpoint(LoadCheckpoint(a.ckpt), model, nullptr);

  std::vector<std::size_t> indices;
  if (a.split == "all") {
    for (std::size_t i = 0; i < dataset.size(); ++i) indices.push_back(i);
  } else {
    const fs::path split_file =
        a.split_file.empty() ? fs::path(a.ckpt).parent_path() / kSplitFileName : fs::path(a.split_file);
    const Bytes bytes = ReadFileBytes(split_file);
    const Split split = ParseSplit(dataset, std::string(bytes.begin(), bytes.end()));
    indices = a.split == "train" ? split.train : split.test;
  }
  const SubsetDataset subset(dataset, indices);
  const EvalResult result = Evaluate(model, subset, run.train.batch_size);
  const std::string grid = FormatConfusion(result, manifest.classes);
  const fs::path out_dir = a.out.empty() ? fs::path(a.ckpt).parent_path() : fs::path(a.out);
  if (!out_dir.empty()) fs::create_directories(out_dir);
  WriteTextFile(out_dir / kConfusionFileName, grid);
  out << "split:    " << a.split << "\n"
      << "samples:  " << result.total << "\n"
      << "top1:     " << result.top1 << " (" << result.correct << "/" << result.total << ")\n"
      << "loss:     " << result.loss << "\n"
      << "confusion matrix (" << (out_dir / kConfusionFileName).string() << "):\n"
      << grid;
  return kExitOk;
}

int AccountCommand(const AccountArgs& a, std::ostream& out) {
  ModelConfig framework;
  if (!a.config.empty()) {
    const RunConfig run = LoadRunConfig(a.config, /*check_paths=*/false);
    nlohmann::json model = run.model_json;
    if (!model.contains("input_height")) model["input_height"] = a.height;
    if (!model.contains("input_width")) model["input_width"] = a.width;
    if (!model.contains("num_classes")) model["num_classes"] = a.classes;
    framework = ModelConfigFromJson(model);
  } else {
    framework.input_height = a.height;
    framework.input_width = a.width;
    framework.num_classes = a.classes;
    framework.Validate();
  }
  // Same depth as the framework so the delta isolates input, head, batchnorm
  // and attention.
  ModelConfig baseline =
      VggOriginalPreset(framework.input_height, framework.input_width, framework.num_classes);
  baseline.stage_channels = framework.stage_channels;
  baseline.convs_per_block = framework.convs_per_block;
  baseline.Validate();

  const std::vector<LayerCost> base_costs = ProfileModel(baseline);
  const std::vector<LayerCost> cand_costs = ProfileModel(framework);
  out << "== framework: " << ModelConfigToJson(framework).dump() << "\n"
      << FormatCostTable(cand_costs) << "\n"
      << "== baseline (3-channel VGG, flatten-4096-4096 head): "
      << ModelConfigToJson(baseline).dump() << "\n"
      << FormatCostTable(base_costs) << "\n"
      << "== per-layer delta (candidate - baseline)\n"
      << FormatCostDelta(base_costs, cand_costs, "vgg-original-3ch", "framework-2ch");
  return kExitOk;
}

int SynthCommand(const SynthArgs& a, std::ostream& out) {
  MovingBarOptions o;
  o.width = a.width;
  o.height = a.height;
  o.samples_per_class = a.per_class;
  o.seed = a.seed;
  const std::vector<LabelledStream> data = GenerateMovingBarDataset(o);
  std::vector<std::size_t> counters(kMovingBarClasses.size(), 0);
  for (const LabelledStream& s : data) {
    const std::string& name = kMovingBarClasses[s.label];
    const fs::path dir = fs::path(a.out) / name;
    fs::create_directories(dir);
    std::ostringstream file;
    file << name << "_" << std::setw(4) << std::setfill('0') << counters[s.label]++ << ".evt";
    WriteEventFile(dir / file.str(), s.stream);
  }
  out << "wrote " << data.size() << " streams (" << kMovingBarClasses.size() << " classes, "
      << a.width << "x" << a.height << ") to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig:
    case ErrorKind::kConfigDigestMismatch:
      return kExitConfig;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    default:
      return kExitData;
  }
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"evframe: event-camera frames and VGG-CBAM training"};
  app.require_subcommand(1);

  ConvertArgs convert;
  CLI::App* c = app.add_subcommand("convert", "Convert raw event files into cached frame tensors");
  c->add_option("input", convert.input, "Event file or <class>/<sample> directory")->required();
  c->add_option("--format", convert.format, "Input format")->check(CLI::IsMember(kFormats));
  c->add_option("--slices,-T", convert.slices, "Number of fixed-count slices")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--slice-mode", convert.slice_mode)->capture_default_str()->check(CLI::IsMember(kSliceModes));
  c->add_option("--reduce", convert.reduce)->capture_default_str()->check(CLI::IsMember(kReduces));
  c->add_option("--normalize", convert.normalize)->capture_default_str()->check(CLI::IsMember(kNorms));
  c->add_option("--out", convert.output, "Output directory")->required();
  c->add_option("--atis-width", convert.atis_width)->capture_default_str();
  c->add_option("--atis-height", convert.atis_height)->capture_default_str();
  c->add_flag("--flip-polarity", convert.flip_polarity, "Swap ON and OFF");

  InspectArgs inspect;
  CLI::App* i = app.add_subcommand("inspect", "Summarize an event or frame file");
  i->add_option("file", inspect.file)->required();
  i->add_option("--format", inspect.format)->check(CLI::IsMember(kFormats));

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "Train a model from a run config");
  t->add_option("--config", train.config)->required();
  t->add_option("--resume", train.resume, "Checkpoint to continue from");

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "Evaluate a checkpoint on converted data");
  e->add_option("--ckpt", eval.ckpt)->required();
  e->add_option("--data", eval.data)->required();
  e->add_option("--config", eval.config)->required();
  e->add_option("--split", eval.split)->capture_default_str()->check(
      CLI::IsMember({"all", "train", "test"}));
  e->add_option("--split-file", eval.split_file, "Defaults to split.tsv beside the checkpoint");
  e->add_option("--out", eval.out, "Directory for confusion.txt (default: checkpoint directory)");

  AccountArgs account;
  CLI::App* a = app.add_subcommand("account", "Parameter and FLOP report against a VGG baseline");
  a->add_option("--config", account.config, "Run config whose model section to profile");
  a->add_option("--height", account.height)->capture_default_str();
  a->add_option("--width", account.width)->capture_default_str();
  a->add_option("--classes", account.classes)->capture_default_str();

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Write a synthetic moving-bar dataset (.evt)");
  s->add_option("--out", synth.out)->required();
  s->add_option("--per-class", synth.per_class)->capture_default_str();
  s->add_option("--width", synth.width)->capture_default_str();
  s->add_option("--height", synth.height)->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c) return Convert(convert, out, err);
    if (*i) return Inspect(inspect, out);
    if (*t) return TrainCommand(train, out, err);
    if (*e) return EvalCommand(eval, out);
    if (*a) return AccountCommand(account, out);
    if (*s) return SynthCommand(synth, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return ExitCodeFor(ex.kind());
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace evframe
