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


#include "evframe/event.h"

#include <algorithm>
#include <string>

#include "evframe/error.h"

namespace evframe {

void CheckGeometry(const SensorGeometry& geometry) {
  if (geometry.width == 0 || geometry.height == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "sensor geometry must be at least 1x1, got " +
                    std::to_string(geometry.width) + "x" +
                    std::to_string(geometry.height));
  }
}

const EventStream& ValidateStream(const EventStream& stream) {
  CheckGeometry(stream.geometry);
  const auto& events = stream.events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (i > 0 && e.t < events[i - 1].t) throw NonMonotonicTimestamps(i);
    if (!stream.geometry.Contains(e.x, e.y)) throw OutOfBounds(i, e.x, e.y);
    if (e.p > 1) {
      throw Error(ErrorKind::kInvalidPolarity,
                  "event " + std::to_string(i) + " has polarity " +
                      std::to_string(e.p));
    }
  }
  return stream;
}

StreamStats ComputeStreamStats(const EventStream& stream) {
  if (stream.events.empty()) {
    throw Error(ErrorKind::kEmptyStream, "stream holds no events");
  }
  StreamStats stats;
  const Event& first = stream.events.front();
  stats.min_x = stats.max_x = first.x;
  stats.min_y = stats.max_y = first.y;
  for (const Event& e : stream.events) {
    if (e.p) {
      ++stats.on_count;
    } else {
      ++stats.off_count;
    }
    stats.min_x = std::min(stats.min_x, e.x);
    stats.max_x = std::max(stats.max_x, e.x);
    stats.min_y = std::min(stats.min_y, e.y);
    stats.max_y = std::max(stats.max_y, e.y);
  }
  stats.count = stream.events.size();
  stats.duration_us = stream.events.back().t - first.t;
  return stats;
}

EventStream ConcatStreams(const EventStream& head, const EventStream& tail) {
  if (!(head.geometry == tail.geometry)) {
    throw Error(ErrorKind::kInvalidArgument,
                "cannot concatenate streams with different geometry");
  }
  EventStream out;
  out.geometry = head.geometry;
  out.label = head.label;
  out.events.reserve(head.size() + tail.size());
  out.events.insert(out.events.end(), head.events.begin(), head.events.end());
  out.events.insert(out.events.end(), tail.events.begin(), tail.events.end());
  ValidateStream(out);
  return out;
}

}  // namespace evframe
