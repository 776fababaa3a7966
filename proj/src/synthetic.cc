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


#include "evframe/synthetic.h"

#include <algorithm>
#include <random>

#include "evframe/dataset.h"
#include "evframe/error.h"

namespace evframe {

namespace {

// Integer in [lo, hi], defined on raw engine output so results do not depend
// on the standard library's distribution implementation.
std::uint32_t UniformInt(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  return lo + static_cast<std::uint32_t>(rng() % (static_cast<std::uint64_t>(hi - lo) + 1));
}

double Unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

EventStream GenerateMovingBar(const MovingBarOptions& o, bool rightward, std::uint64_t seed) {
  if (o.min_travel == 0 || o.min_travel > o.max_travel || o.height < 2 ||
      o.bar_width + o.max_travel > o.width) {
    throw Error(ErrorKind::kInvalidArgument, "moving bar does not fit the sensor geometry");
  }
  std::mt19937_64 rng(seed);
  const std::uint32_t travel = UniformInt(rng, o.min_travel, o.max_travel);
  const std::uint32_t span = o.bar_width + travel;
  // Leftmost column covered during the sweep.
  const std::uint32_t origin = UniformInt(rng, 0, o.width - span);
  const std::uint32_t y0 = UniformInt(rng, 0, o.height / 4);
  const std::uint32_t y1 = UniformInt(rng, o.height - 1 - o.height / 4, o.height - 1);

  std::vector<Event> events;
  for (std::uint32_t s = 0; s < travel; ++s) {
    // Bar covers [left, left + bar_width) before step s.
    const std::uint32_t left = rightward ? origin + s : origin + travel - s;
    const std::uint32_t on_x = rightward ? left + o.bar_width : left - 1;
    const std::uint32_t off_x = rightward ? left : left + o.bar_width - 1;
    const std::uint64_t t0 = s * o.step_us;
    for (std::uint32_t y = y0; y <= y1; ++y) {
      if (Unit(rng) < o.fire_probability) {
        events.push_back({on_x, y,
                          t0 + rng() % o.step_us, 1});
      }
      if (Unit(rng) < o.fire_probability) {
        events.push_back({off_x, y,
                          t0 + rng() % o.step_us, 0});
      }
    }
  }
  const std::size_t noise =
      static_cast<std::size_t>(o.noise_fraction * static_cast<double>(events.size()));
  const std::uint64_t duration = travel * o.step_us;
  for (std::size_t i = 0; i < noise; ++i) {
    events.push_back({UniformInt(rng, 0, o.width - 1),
                      UniformInt(rng, 0, o.height - 1),
                      rng() % duration, static_cast<std::uint8_t>(rng() & 1)});
  }
  if (events.empty()) {
    events.push_back({origin, y0, 0, 1});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  EventStream stream;
  stream.events = std::move(events);
  stream.geometry = {o.width, o.height};
  stream.label = rightward ? 1 : 0;
  ValidateStream(stream);
  return stream;
}

std::vector<LabelledStream> GenerateMovingBarDataset(const MovingBarOptions& options) {
  std::vector<LabelledStream> out;
  for (std::int32_t label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < options.samples_per_class; ++i) {
      const std::uint64_t seed =
          MixSeed(options.seed, static_cast<std::uint64_t>(label) * options.samples_per_class + i);
      out.push_back({GenerateMovingBar(options, label == 1, seed), label});
    }
  }
  return out;
}

}  // namespace evframe
