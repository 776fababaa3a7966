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


#include "evframe/convert.h"

#include <mutex>

#include "evframe/error.h"
#include "evframe/parallel.h"

namespace evframe {

namespace fs = std::filesystem;

namespace {

struct Job {
  fs::path source;
  std::string class_name;
  std::int32_t label = 0;
};

}  // namespace

ConvertReport ConvertDataset(const ConvertOptions& options) {
  std::vector<Job> jobs;
  std::vector<std::string> classes;
  EventFormat format;
  if (fs::is_directory(options.input)) {
    if (!options.format) {
      throw Error(ErrorKind::kInvalidArgument, "--format is required for directory input");
    }
    format = *options.format;
    for (const DatasetEntry& e :
         ListClassDirectory(options.input, EventFormatExtension(format), &classes)) {
      jobs.push_back({e.path, e.class_name, e.label});
    }
  } else if (fs::is_regular_file(options.input)) {
    const std::optional<EventFormat> guessed = options.format ? options.format
                                                              : FormatFromExtension(options.input);
    if (!guessed) {
      throw Error(ErrorKind::kInvalidArgument,
                  "cannot infer the format of " + options.input.string() + "; pass --format");
    }
    format = *guessed;
    classes.push_back(options.input.parent_path().filename().string());
    if (classes.back().empty()) classes.back() = "unlabeled";
    jobs.push_back({options.input, "", 0});
  } else {
    throw Error(ErrorKind::kIo, "input does not exist: " + options.input.string());
  }
  if (options.representation.slices == 0) {
    throw Error(ErrorKind::kInvalidArgument, "the slice count must be positive");
  }

  DecodeOptions decode;
  decode.geometry = options.atis_geometry;
  decode.flip_polarity = options.flip_polarity;

  std::vector<ManifestEntry> entries(jobs.size());
  std::vector<std::optional<SensorGeometry>> geometries(jobs.size());
  ParallelFor(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    ManifestEntry& e = entries[i];
    e.source_path = job.source.string();
    e.label = job.label;
    try {
      const EventStream stream = ReadEventFile(job.source, format, decode);
      const StreamStats stats = ComputeStreamStats(stream);
      e.events = stats.count;
      e.duration_us = stats.duration_us;
      e.on_events = stats.on_count;
      e.off_events = stats.off_count;
      const SliceSpec spec = SliceByCount(stream.events.size(), options.representation.slices,
                                          options.representation.slice_mode);
      const FrameTensor frames = IntegrateFrames(stream, spec);
      const fs::path relative = job.class_name.empty()
                                    ? fs::path(job.source.stem().string() + ".frm")
                                    : fs::path(job.class_name) / (job.source.stem().string() + ".frm");
      fs::create_directories((options.output / relative).parent_path());
      WriteFrameFile(options.output / relative, frames);
      e.frame_path = relative.generic_string();
      geometries[i] = stream.geometry;
    } catch (const std::exception& ex) {
      e.status = std::string("error: ") + ex.what();
    }
  });

  ConvertReport report;
  Manifest& m = report.manifest;
  m.format = format;
  m.representation = options.representation;
  m.flip_polarity = options.flip_polarity;
  m.classes = classes;
  // The first decoded file fixes the geometry; later files must agree.
  std::optional<SensorGeometry> geometry;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!geometries[i]) continue;
    if (!geometry) geometry = geometries[i];
    if (geometries[i]->width != geometry->width || geometries[i]->height != geometry->height) {
      entries[i].status = "error: geometry " + std::to_string(geometries[i]->width) + "x" +
                          std::to_string(geometries[i]->height) + " differs from " +
                          std::to_string(geometry->width) + "x" + std::to_string(geometry->height);
      std::error_code ignored;
      fs::remove(options.output / entries[i].frame_path, ignored);
      entries[i].frame_path.clear();
    }
  }
  if (geometry) {
    m.width = geometry->width;
    m.height = geometry->height;
  }
  for (ManifestEntry& e : entries) {
    if (e.ok()) {
      ++report.converted;
    } else {
      report.failures.push_back({e.source_path, e.status.substr(7)});
    }
  }
  m.entries = std::move(entries);
  fs::create_directories(options.output);
  WriteManifest(options.output, m);
  return report;
}

}  // namespace evframe
