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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evframe/codec.h"
#include "evframe/dataset.h"

namespace evframe {

struct ConvertOptions {
  // A single event file, or a directory laid out as <class>/<sample>.<ext>.
  std::filesystem::path input;
  std::filesystem::path output;
  // Guessed from the file extension when absent (single-file input only).
  std::optional<EventFormat> format;
  RepresentationConfig representation;
  // Sensor geometry for ATIS .bin input; other formats carry or imply theirs.
  SensorGeometry atis_geometry = kAtisGeometry;
  bool flip_polarity = false;
};

struct ConvertFailure {
  std::string source;
  std::string message;
};

struct ConvertReport {
  Manifest manifest;
  std::size_t converted = 0;
  std::vector<ConvertFailure> failures;
};

// Decodes, slices and integrates every input into <output>/<class>/<stem>.frm
// (files run in parallel) and writes the manifest. Per-file decode or
// slicing failures are recorded in the manifest and the report instead of
// aborting; a batch with failures is marked "partial". Throws for unusable
// options (unknown format, unreadable input directory).
ConvertReport ConvertDataset(const ConvertOptions& options);

}  // namespace evframe
