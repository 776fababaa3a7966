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
#include <memory>
#include <string>
#include <vector>

#include "evframe/codec.h"
#include "evframe/representation.h"
#include "evframe/tensor.h"

namespace evframe {

// How raw streams become network inputs.
struct RepresentationConfig {
  std::size_t slices = 20;
  SliceMode slice_mode = SliceMode::kRemainderToLast;
  TemporalReduce reduce = TemporalReduce::kMean;
  Normalization normalize = Normalization::kPerSampleMax;

  // Network input for one sample: reduce, then normalize.
  Tensor Prepare(const FrameTensor& frames) const;
  // Channels of the prepared input (2, or 2T when stacking).
  std::size_t InputChannels() const;
};

// One row of a conversion manifest. Failed files keep their source path,
// an empty frame path and an "error: ..." status.
struct ManifestEntry {
  std::string frame_path;  // relative to the manifest directory
  std::string source_path;
  std::int32_t label = -1;
  std::uint64_t events = 0;
  std::uint64_t duration_us = 0;
  std::uint64_t on_events = 0;
  std::uint64_t off_events = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct Manifest {
  EventFormat format = EventFormat::kPortable;
  RepresentationConfig representation;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  bool flip_polarity = false;
  std::vector<std::string> classes;
  std::vector<ManifestEntry> entries;

  bool complete() const;
};

inline constexpr char kManifestFileName[] = "manifest.tsv";

// Tab-separated text: '#' key=value header lines, a column header line,
// then one row per source file.
std::string FormatManifest(const Manifest& manifest);
// MalformedHeader naming the offending line.
Manifest ParseManifest(const std::string& text);
void WriteManifest(const std::filesystem::path& dir, const Manifest& manifest);
Manifest ReadManifest(const std::filesystem::path& dir);

// Labelled samples addressed by index; Load returns a tensor of sample_shape().
class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  virtual std::int32_t label(std::size_t i) const = 0;
  virtual std::string id(std::size_t i) const = 0;
  virtual Tensor Load(std::size_t i) const = 0;
  virtual Shape sample_shape() const = 0;
  virtual std::size_t num_classes() const = 0;
};

class InMemoryDataset : public Dataset {
 public:
  InMemoryDataset(Shape sample_shape, std::size_t num_classes);
  // ShapeMismatch / LabelOutOfRange on inconsistent samples.
  void Add(Tensor input, std::int32_t label, std::string id);

  std::size_t size() const override { return inputs_.size(); }
  std::int32_t label(std::size_t i) const override { return labels_.at(i); }
  std::string id(std::size_t i) const override { return ids_.at(i); }
  Tensor Load(std::size_t i) const override { return inputs_.at(i); }
  Shape sample_shape() const override { return shape_; }
  std::size_t num_classes() const override { return classes_; }

 private:
  Shape shape_;
  std::size_t classes_;
  std::vector<Tensor> inputs_;
  std::vector<std::int32_t> labels_;
  std::vector<std::string> ids_;
};

// Successfully converted samples of a manifest directory, read lazily.
class FrameDataset : public Dataset {
 public:
  // Uses the manifest's representation settings.
  explicit FrameDataset(const std::filesystem::path& dir);
  // `representation` must agree with the manifest on slices and slice mode
  // (InvalidConfig otherwise); reduce and normalize may differ.
  FrameDataset(const std::filesystem::path& dir, const RepresentationConfig& representation);

  std::size_t size() const override { return entries_.size(); }
  std::int32_t label(std::size_t i) const override { return entries_.at(i).label; }
  std::string id(std::size_t i) const override { return entries_.at(i).frame_path; }
  Tensor Load(std::size_t i) const override;
  Shape sample_shape() const override;
  std::size_t num_classes() const override { return manifest_.classes.size(); }
  const Manifest& manifest() const { return manifest_; }

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
  RepresentationConfig representation_;
  std::vector<ManifestEntry> entries_;
};

// View of selected indices of another dataset, which must outlive it.
class SubsetDataset : public Dataset {
 public:
  SubsetDataset(const Dataset& base, std::vector<std::size_t> indices);

  std::size_t size() const override { return indices_.size(); }
  std::int32_t label(std::size_t i) const override { return base_.label(indices_.at(i)); }
  std::string id(std::size_t i) const override { return base_.id(indices_.at(i)); }
  Tensor Load(std::size_t i) const override { return base_.Load(indices_.at(i)); }
  Shape sample_shape() const override { return base_.sample_shape(); }
  std::size_t num_classes() const override { return base_.num_classes(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  const Dataset& base_;
  std::vector<std::size_t> indices_;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, a seeded shuffle puts round(train_fraction * n) samples (at
// least one when the class has two or more) in train and the rest in test.
// Indices in each part are returned in ascending order.
Split MakeSplit(const Dataset& dataset, double train_fraction, std::uint64_t seed);

// Columns: id, label, split ("train" | "test").
std::string FormatSplit(const Dataset& dataset, const Split& split);
// Resolves ids of a split file against `dataset`; MalformedHeader on ids it
// does not contain.
Split ParseSplit(const Dataset& dataset, const std::string& text);

// Deterministic Fisher-Yates over [0, n) driven by a 64-bit seed.
std::vector<std::size_t> SeededPermutation(std::size_t n, std::uint64_t seed);
// SplitMix64 step, used to derive independent seeds.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace evframe
