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
#include <span>
#include <string_view>
#include <vector>

#include "evframe/byte_io.h"
#include "evframe/event.h"
#include "evframe/tensor.h"

namespace evframe {

// kStrict drops the trailing N mod T events; kRemainderToLast folds them
// into the final slice.
enum class SliceMode { kStrict, kRemainderToLast };
enum class TemporalReduce { kMean, kSum, kStack };
enum class Normalization { kNone, kPerSampleMax, kLog1p };

SliceMode ParseSliceMode(std::string_view name);            // strict | remainder
TemporalReduce ParseTemporalReduce(std::string_view name);  // mean | sum | stack
Normalization ParseNormalization(std::string_view name);    // none | max | log1p
std::string_view SliceModeName(SliceMode mode);
std::string_view TemporalReduceName(TemporalReduce mode);
std::string_view NormalizationName(Normalization mode);

// Half-open event index range [begin, end).
struct IndexInterval {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const IndexInterval&, const IndexInterval&) = default;
};

struct SliceSpec {
  std::size_t event_count = 0;
  std::size_t slices = 0;
  SliceMode mode = SliceMode::kRemainderToLast;
  std::vector<IndexInterval> boundaries;

  // Number of events that fall inside some slice.
  std::size_t CoveredEvents() const;
};

// Fixed-count slicing: slice n covers [floor(N/T)*n, floor(N/T)*(n+1)).
// Throws Error(kTooFewEvents) when N < T.
SliceSpec SliceByCount(std::size_t event_count, std::size_t slices, SliceMode mode);

// Per-slice, per-polarity, per-pixel event counts, laid out T x 2 x H x W.
class FrameTensor {
 public:
  static constexpr std::size_t kChannels = 2;

  FrameTensor() = default;
  FrameTensor(std::size_t slices, SensorGeometry geometry);

  std::size_t slices() const { return slices_; }
  const SensorGeometry& geometry() const { return geometry_; }
  std::size_t height() const { return geometry_.height; }
  std::size_t width() const { return geometry_.width; }
  Shape shape() const { return {slices_, kChannels, height(), width()}; }

  std::span<std::uint32_t> counts() { return counts_; }
  std::span<const std::uint32_t> counts() const { return counts_; }

  std::size_t Index(std::size_t n, std::size_t p, std::size_t y, std::size_t x) const {
    return ((n * kChannels + p) * height() + y) * width() + x;
  }
  std::uint32_t at(std::size_t n, std::size_t p, std::size_t y, std::size_t x) const {
    return counts_[Index(n, p, y, x)];
  }
  std::uint32_t& at(std::size_t n, std::size_t p, std::size_t y, std::size_t x) {
    return counts_[Index(n, p, y, x)];
  }

  std::uint64_t Total() const;
  std::uint64_t SliceTotal(std::size_t n) const;
  std::uint64_t ChannelTotal(std::size_t p) const;

  friend bool operator==(const FrameTensor&, const FrameTensor&) = default;

 private:
  std::size_t slices_ = 0;
  SensorGeometry geometry_;
  std::vector<std::uint32_t> counts_;
};

// Frame(n, p, x, y) = number of events i in slice n with (p_i, x_i, y_i) =
// (p, x, y). `spec` must have been computed for this stream's length.
FrameTensor IntegrateFrames(const EventStream& stream, const SliceSpec& spec);

// mean / sum collapse T into a 2 x H x W tensor; stack gives 2T x H x W with
// channel index n * 2 + p.
Tensor TemporalReduceFrames(const FrameTensor& frames, TemporalReduce mode);

// Per-sample normalization of non-negative inputs. An all-zero tensor passes
// through per_sample_max unchanged.
Tensor NormalizeInput(const Tensor& x, Normalization mode);

// Cached frame file (.frm), little-endian:
//   "EVFRAM01" | T u32 | C u32 (= 2) | H u32 | W u32 | dtype u8 | payload
// dtype 0 = u32 counts, row-major T x C x H x W.
inline constexpr std::string_view kFrameMagic = "EVFRAM01";
inline constexpr std::size_t kFrameHeaderSize = 25;

Bytes EncodeFrameFile(const FrameTensor& frames);
FrameTensor DecodeFrameFile(std::span<const std::uint8_t> bytes);
void WriteFrameFile(const std::filesystem::path& path, const FrameTensor& frames);
FrameTensor ReadFrameFile(const std::filesystem::path& path);

}  // namespace evframe
