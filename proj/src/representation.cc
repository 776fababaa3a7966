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


#include "evframe/representation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "evframe/error.h"

namespace evframe {

namespace {
constexpr std::uint8_t kDtypeU32 = 0;
}  // namespace

SliceMode ParseSliceMode(std::string_view name) {
  if (name == "strict") return SliceMode::kStrict;
  if (name == "remainder" || name == "remainder_to_last") return SliceMode::kRemainderToLast;
  throw Error(ErrorKind::kInvalidArgument, "unknown slice mode '" + std::string(name) + "'");
}

TemporalReduce ParseTemporalReduce(std::string_view name) {
  if (name == "mean") return TemporalReduce::kMean;
  if (name == "sum") return TemporalReduce::kSum;
  if (name == "stack") return TemporalReduce::kStack;
  throw Error(ErrorKind::kInvalidArgument, "unknown reduce mode '" + std::string(name) + "'");
}

Normalization ParseNormalization(std::string_view name) {
  if (name == "none") return Normalization::kNone;
  if (name == "max" || name == "per_sample_max") return Normalization::kPerSampleMax;
  if (name == "log1p") return Normalization::kLog1p;
  throw Error(ErrorKind::kInvalidArgument, "unknown normalization '" + std::string(name) + "'");
}

std::string_view SliceModeName(SliceMode mode) {
  return mode == SliceMode::kStrict ? "strict" : "remainder";
}

std::string_view TemporalReduceName(TemporalReduce mode) {
  switch (mode) {
    case TemporalReduce::kMean: return "mean";
    case TemporalReduce::kSum: return "sum";
    case TemporalReduce::kStack: return "stack";
  }
  return "?";
}

std::string_view NormalizationName(Normalization mode) {
  switch (mode) {
    case Normalization::kNone: return "none";
    case Normalization::kPerSampleMax: return "max";
    case Normalization::kLog1p: return "log1p";
  }
  return "?";
}

std::size_t SliceSpec::CoveredEvents() const {
  std::size_t total = 0;
  for (const auto& b : boundaries) total += b.size();
  return total;
}

SliceSpec SliceByCount(std::size_t event_count, std::size_t slices, SliceMode mode) {
  if (slices == 0) throw Error(ErrorKind::kInvalidArgument, "slice count must be positive");
  if (event_count < slices) {
    throw Error(ErrorKind::kTooFewEvents, std::to_string(event_count) +
                                              " events cannot fill " +
                                              std::to_string(slices) + " non-empty slices");
  }
  SliceSpec spec;
  spec.event_count = event_count;
  spec.slices = slices;
  spec.mode = mode;
  const std::size_t width = event_count / slices;
  spec.boundaries.reserve(slices);
  for (std::size_t n = 0; n < slices; ++n) {
    spec.boundaries.push_back({width * n, width * (n + 1)});
  }
  if (mode == SliceMode::kRemainderToLast) spec.boundaries.back().end = event_count;
  return spec;
}

FrameTensor::FrameTensor(std::size_t slices, SensorGeometry geometry)
    : slices_(slices),
      geometry_(geometry),
      counts_(slices * kChannels * geometry.width * geometry.height, 0) {}

std::uint64_t FrameTensor::Total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t FrameTensor::SliceTotal(std::size_t n) const {
  const std::size_t plane = kChannels * height() * width();
  auto first = counts_.begin() + static_cast<std::ptrdiff_t>(n * plane);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(plane), std::uint64_t{0});
}

std::uint64_t FrameTensor::ChannelTotal(std::size_t p) const {
  const std::size_t plane = height() * width();
  std::uint64_t total = 0;
  for (std::size_t n = 0; n < slices_; ++n) {
    auto first = counts_.begin() + static_cast<std::ptrdiff_t>((n * kChannels + p) * plane);
    total = std::accumulate(first, first + static_cast<std::ptrdiff_t>(plane), total);
  }
  return total;
}

FrameTensor IntegrateFrames(const EventStream& stream, const SliceSpec& spec) {
  if (spec.event_count != stream.size() || spec.boundaries.size() != spec.slices) {
    throw Error(ErrorKind::kInvalidArgument,
                "slice spec was computed for " + std::to_string(spec.event_count) +
                    " events, stream has " + std::to_string(stream.size()));
  }
  CheckGeometry(stream.geometry);
  FrameTensor frames(spec.slices, stream.geometry);
  auto counts = frames.counts();
  const std::size_t width = stream.geometry.width;
  const std::size_t height = stream.geometry.height;
  for (std::size_t n = 0; n < spec.slices; ++n) {
    const std::size_t base = n * FrameTensor::kChannels * height * width;
    const IndexInterval range = spec.boundaries[n];
    for (std::size_t i = range.begin; i < range.end; ++i) {
      const Event& e = stream.events[i];
      ++counts[base + (e.p * height + e.y) * width + e.x];
    }
  }
  return frames;
}

Tensor TemporalReduceFrames(const FrameTensor& frames, TemporalReduce mode) {
  const std::size_t slices = frames.slices();
  const std::size_t plane = FrameTensor::kChannels * frames.height() * frames.width();
  auto counts = frames.counts();
  if (mode == TemporalReduce::kStack) {
    Tensor out({slices * FrameTensor::kChannels, frames.height(), frames.width()});
    std::copy(counts.begin(), counts.end(), out.data());
    return out;
  }
  Tensor out({FrameTensor::kChannels, frames.height(), frames.width()});
  // Integer accumulation keeps sums exact before the cast.
  std::vector<std::uint64_t> sum(plane, 0);
  for (std::size_t n = 0; n < slices; ++n) {
    for (std::size_t i = 0; i < plane; ++i) sum[i] += counts[n * plane + i];
  }
  const double divisor = mode == TemporalReduce::kMean ? static_cast<double>(slices) : 1.0;
  for (std::size_t i = 0; i < plane; ++i) out[i] = static_cast<double>(sum[i]) / divisor;
  return out;
}

Tensor NormalizeInput(const Tensor& x, Normalization mode) {
  Tensor out = x;
  switch (mode) {
    case Normalization::kNone:
      break;
    case Normalization::kPerSampleMax: {
      const double peak = x.empty() ? 0.0 : x.MaxValue();
      if (peak > 0.0) {
        for (double& v : out.values()) v /= peak;
      }
      break;
    }
    case Normalization::kLog1p:
      for (double& v : out.values()) v = std::log1p(v);
      break;
  }
  return out;
}

Bytes EncodeFrameFile(const FrameTensor& frames) {
  ByteWriter w;
  w.buffer().reserve(kFrameHeaderSize + frames.counts().size() * 4);
  w.Raw(kFrameMagic);
  w.U32(static_cast<std::uint32_t>(frames.slices()));
  w.U32(static_cast<std::uint32_t>(FrameTensor::kChannels));
  w.U32(static_cast<std::uint32_t>(frames.height()));
  w.U32(static_cast<std::uint32_t>(frames.width()));
  w.U8(kDtypeU32);
  for (std::uint32_t c : frames.counts()) w.U32(c);
  return w.Take();
}

FrameTensor DecodeFrameFile(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kFrameMagic.size() || r.Raw(kFrameMagic.size()) != kFrameMagic) {
    throw Error(ErrorKind::kBadMagic, "not an EVFRAM01 frame file");
  }
  const std::uint32_t slices = r.U32();
  const std::uint32_t channels = r.U32();
  SensorGeometry geometry;
  geometry.height = r.U32();
  geometry.width = r.U32();
  const std::uint8_t dtype = r.U8();
  if (channels != FrameTensor::kChannels) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "frame file has " + std::to_string(channels) + " channels, expected 2");
  }
  if (dtype != kDtypeU32) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "frame file dtype tag " + std::to_string(dtype));
  }
  if (slices == 0) throw Error(ErrorKind::kMalformedHeader, "frame file declares zero slices");
  CheckGeometry(geometry);
  FrameTensor frames(slices, geometry);
  const std::size_t expected = frames.counts().size() * 4;
  if (r.remaining() != expected) {
    if (r.remaining() < expected) {
      throw TruncatedRecord(bytes.size(), "frame payload shorter than header declares");
    }
    throw Error(ErrorKind::kCountMismatch, "frame payload longer than header declares");
  }
  for (std::uint32_t& c : frames.counts()) c = r.U32();
  return frames;
}

void WriteFrameFile(const std::filesystem::path& path, const FrameTensor& frames) {
  WriteFileBytes(path, EncodeFrameFile(frames));
}

FrameTensor ReadFrameFile(const std::filesystem::path& path) {
  return DecodeFrameFile(ReadFileBytes(path));
}

}  // namespace evframe
