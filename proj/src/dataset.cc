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


#include "evframe/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "evframe/byte_io.h"
#include "evframe/error.h"

namespace evframe {

namespace {

constexpr char kColumns[] = "frame\tsource\tlabel\tevents\tduration_us\ton\toff\tstatus";

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Tabs and newlines would break the row structure.
std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

[[noreturn]] void BadLine(std::size_t line_no, const std::string& message) {
  throw Error(ErrorKind::kMalformedHeader,
              "manifest line " + std::to_string(line_no) + ": " + message);
}

std::uint64_t ParseUnsigned(const std::string& s, std::size_t line_no) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    BadLine(line_no, "expected an unsigned integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    BadLine(line_no, "integer out of range '" + s + "'");
  }
}

}  // namespace

Tensor RepresentationConfig::Prepare(const FrameTensor& frames) const {
  return NormalizeInput(TemporalReduceFrames(frames, reduce), normalize);
}

std::size_t RepresentationConfig::InputChannels() const {
  return reduce == TemporalReduce::kStack ? 2 * slices : 2;
}

bool Manifest::complete() const {
  return std::all_of(entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.ok(); });
}

std::string FormatManifest(const Manifest& m) {
  std::ostringstream os;
  os << "# evframe manifest\n";
  os << "# format=" << EventFormatName(m.format) << "\n";
  os << "# slices=" << m.representation.slices << "\n";
  os << "# slice_mode=" << SliceModeName(m.representation.slice_mode) << "\n";
  os << "# reduce=" << TemporalReduceName(m.representation.reduce) << "\n";
  os << "# normalize=" << NormalizationName(m.representation.normalize) << "\n";
  os << "# width=" << m.width << "\n";
  os << "# height=" << m.height << "\n";
  os << "# flip_polarity=" << (m.flip_polarity ? 1 : 0) << "\n";
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    os << "# class=" << i << " " << Sanitize(m.classes[i]) << "\n";
  }
  os << "# status=" << (m.complete() ? "complete" : "partial") << "\n";
  os << kColumns << "\n";
  for (const ManifestEntry& e : m.entries) {
    os << Sanitize(e.frame_path) << '\t' << Sanitize(e.source_path) << '\t' << e.label << '\t'
       << e.events << '\t' << e.duration_us << '\t' << e.on_events << '\t' << e.off_events << '\t'
       << Sanitize(e.status) << "\n";
  }
  return os.str();
}

Manifest ParseManifest(const std::string& text) {
  Manifest m;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  bool columns_seen = false;
  std::map<std::size_t, std::string> classes;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      try {
        if (key == "format") {
          m.format = ParseEventFormat(value);
        } else if (key == "slices") {
          m.representation.slices = ParseUnsigned(value, line_no);
        } else if (key == "slice_mode") {
          m.representation.slice_mode = ParseSliceMode(value);
        } else if (key == "reduce") {
          m.representation.reduce = ParseTemporalReduce(value);
        } else if (key == "normalize") {
          m.representation.normalize = ParseNormalization(value);
        } else if (key == "width") {
          m.width = static_cast<std::uint32_t>(ParseUnsigned(value, line_no));
        } else if (key == "height") {
          m.height = static_cast<std::uint32_t>(ParseUnsigned(value, line_no));
        } else if (key == "flip_polarity") {
          m.flip_polarity = value == "1";
        } else if (key == "class") {
          const std::size_t space = value.find(' ');
          if (space == std::string::npos) BadLine(line_no, "class line needs index and name");
          classes[ParseUnsigned(value.substr(0, space), line_no)] = value.substr(space + 1);
        }
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kMalformedHeader) throw;
        BadLine(line_no, e.detail());
      }
      continue;
    }
    if (!columns_seen) {
      if (line != kColumns) BadLine(line_no, "unexpected column header");
      columns_seen = true;
      continue;
    }
    const std::vector<std::string> f = SplitTabs(line);
    if (f.size() != 8) BadLine(line_no, "expected 8 columns, got " + std::to_string(f.size()));
    ManifestEntry e;
    e.frame_path = f[0];
    e.source_path = f[1];
    try {
      e.label = static_cast<std::int32_t>(std::stol(f[2]));
    } catch (const std::exception&) {
      BadLine(line_no, "bad label '" + f[2] + "'");
    }
    e.events = ParseUnsigned(f[3], line_no);
    e.duration_us = ParseUnsigned(f[4], line_no);
    e.on_events = ParseUnsigned(f[5], line_no);
    e.off_events = ParseUnsigned(f[6], line_no);
    e.status = f[7];
    if (e.ok() && (e.label < 0 || static_cast<std::size_t>(e.label) >= classes.size())) {
      BadLine(line_no, "label " + f[2] + " has no class line");
    }
    m.entries.push_back(std::move(e));
  }
  if (!columns_seen) throw Error(ErrorKind::kMalformedHeader, "manifest has no column header");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!classes.count(i)) {
      throw Error(ErrorKind::kMalformedHeader, "manifest class indices are not contiguous");
    }
    m.classes.push_back(classes[i]);
  }
  return m;
}

void WriteManifest(const std::filesystem::path& dir, const Manifest& manifest) {
  WriteTextFile(dir / kManifestFileName, FormatManifest(manifest));
}

Manifest ReadManifest(const std::filesystem::path& dir) {
  const Bytes bytes = ReadFileBytes(dir / kManifestFileName);
  return ParseManifest(std::string(bytes.begin(), bytes.end()));
}

// ---- datasets --------------------------------------------------------------

InMemoryDataset::InMemoryDataset(Shape sample_shape, std::size_t num_classes)
    : shape_(std::move(sample_shape)), classes_(num_classes) {}

void InMemoryDataset::Add(Tensor input, std::int32_t label, std::string id) {
  input.RequireShape(shape_, "dataset sample");
  if (label < 0 || static_cast<std::size_t>(label) >= classes_) {
    throw Error(ErrorKind::kLabelOutOfRange,
                "label " + std::to_string(label) + " outside [0, " + std::to_string(classes_) + ")");
  }
  inputs_.push_back(std::move(input));
  labels_.push_back(label);
  ids_.push_back(std::move(id));
}

FrameDataset::FrameDataset(const std::filesystem::path& dir)
    : FrameDataset(dir, ReadManifest(dir).representation) {}

FrameDataset::FrameDataset(const std::filesystem::path& dir,
                           const RepresentationConfig& representation)
    : dir_(dir), manifest_(ReadManifest(dir)), representation_(representation) {
  if (representation.slices != manifest_.representation.slices) {
    throw Error(ErrorKind::kInvalidConfig,
                "representation.slices: " + std::to_string(representation.slices) +
                    " but the data was converted with " +
                    std::to_string(manifest_.representation.slices));
  }
  if (representation.slice_mode != manifest_.representation.slice_mode) {
    throw Error(ErrorKind::kInvalidConfig,
                "representation.slice_mode: data was converted with " +
                    std::string(SliceModeName(manifest_.representation.slice_mode)));
  }
  for (const ManifestEntry& e : manifest_.entries) {
    if (e.ok()) entries_.push_back(e);
  }
}

Tensor FrameDataset::Load(std::size_t i) const {
  const FrameTensor frames = ReadFrameFile(dir_ / entries_.at(i).frame_path);
  if (frames.slices() != representation_.slices || frames.width() != manifest_.width ||
      frames.height() != manifest_.height) {
    throw Error(ErrorKind::kShapeMismatch, entries_[i].frame_path + " has shape " +
                                               ShapeToString(frames.shape()) +
                                               ", manifest disagrees");
  }
  return representation_.Prepare(frames);
}

Shape FrameDataset::sample_shape() const {
  return {representation_.InputChannels(), manifest_.height, manifest_.width};
}

SubsetDataset::SubsetDataset(const Dataset& base, std::vector<std::size_t> indices)
    : base_(base), indices_(std::move(indices)) {
  for (std::size_t i : indices_) {
    if (i >= base_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "subset index " + std::to_string(i) +
                                                   " outside dataset of " +
                                                   std::to_string(base_.size()));
    }
  }
}

// ---- splits ----------------------------------------------------------------

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> SeededPermutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = n; i > 1; --i) {
    state = MixSeed(state, i);
    std::swap(order[i - 1], order[state % i]);
  }
  return order;
}

Split MakeSplit(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "data.train_fraction: must lie in (0, 1]");
  }
  std::map<std::int32_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.label(i)].push_back(i);
  Split split;
  for (auto& [label, members] : by_class) {
    const std::vector<std::size_t> order =
        SeededPermutation(members.size(), MixSeed(seed, static_cast<std::uint64_t>(label)));
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    if (members.size() >= 2) n_train = std::max<std::size_t>(n_train, 1);
    n_train = std::min(n_train, members.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      (k < n_train ? split.train : split.test).push_back(members[order[k]]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string FormatSplit(const Dataset& dataset, const Split& split) {
  std::vector<std::pair<std::size_t, const char*>> rows;
  for (std::size_t i : split.train) rows.emplace_back(i, "train");
  for (std::size_t i : split.test) rows.emplace_back(i, "test");
  std::sort(rows.begin(), rows.end());
  std::ostringstream os;
  os << "id\tlabel\tsplit\n";
  for (const auto& [i, part] : rows) {
    os << Sanitize(dataset.id(i)) << '\t' << dataset.label(i) << '\t' << part << "\n";
  }
  return os.str();
}

Split ParseSplit(const Dataset& dataset, const std::string& text) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.size(); ++i) index[dataset.id(i)] = i;
  Split split;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) continue;
    const std::vector<std::string> f = SplitTabs(line);
    if (f.size() != 3) {
      throw Error(ErrorKind::kMalformedHeader, "split line " + std::to_string(line_no) +
                                                   ": expected 3 columns");
    }
    const auto it = index.find(f[0]);
    if (it == index.end()) {
      throw Error(ErrorKind::kMalformedHeader, "split line " + std::to_string(line_no) +
                                                   ": unknown sample '" + f[0] + "'");
    }
    if (f[2] == "train") {
      split.train.push_back(it->second);
    } else if (f[2] == "test") {
      split.test.push_back(it->second);
    } else {
      throw Error(ErrorKind::kMalformedHeader, "split line " + std::to_string(line_no) +
                                                   ": unknown split '" + f[2] + "'");
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace evframe
