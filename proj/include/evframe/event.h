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
#include <optional>
#include <vector>

namespace evframe {

// One address-event: pixel (x, y), timestamp in microseconds, polarity
// (0 = OFF / brightness decrease, 1 = ON / increase).
struct Event {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint64_t t = 0;
  std::uint8_t p = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  bool Contains(std::uint32_t x, std::uint32_t y) const {
    return x < width && y < height;
  }
  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

// An ordered event sequence on a fixed sensor. Equal timestamps are legal and
// their relative order is preserved as produced by the decoder.
struct EventStream {
  std::vector<Event> events;
  SensorGeometry geometry;
  std::optional<std::int32_t> label;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct StreamStats {
  std::size_t count = 0;
  std::uint64_t duration_us = 0;
  std::size_t on_count = 0;
  std::size_t off_count = 0;
  std::uint32_t min_x = 0;
  std::uint32_t max_x = 0;
  std::uint32_t min_y = 0;
  std::uint32_t max_y = 0;
};

// Throws InvalidArgument for a zero-sized geometry.
void CheckGeometry(const SensorGeometry& geometry);

// Checks ordering, bounds and polarity. Returns the stream unchanged.
// Throws NonMonotonicTimestamps, OutOfBounds or Error(kInvalidPolarity).
const EventStream& ValidateStream(const EventStream& stream);

// Throws Error(kEmptyStream) when the stream holds no events.
StreamStats ComputeStreamStats(const EventStream& stream);

// Appends `tail` after `head`. Both must share a geometry; the result is
// validated, so `tail` must not start before `head` ends.
EventStream ConcatStreams(const EventStream& head, const EventStream& tail);

}  // namespace evframe
