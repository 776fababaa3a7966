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
#include <string>
#include <vector>

#include "evframe/event.h"

namespace evframe {

// Vertical bar sweeping horizontally: each step the leading edge fires ON
// events and the vacated trailing column fires OFF events, plus uniform noise.
struct MovingBarOptions {
  std::uint32_t width = 16;
  std::uint32_t height = 16;
  std::size_t samples_per_class = 32;
  std::uint32_t bar_width = 2;
  std::uint32_t min_travel = 4;
  std::uint32_t max_travel = 6;
  double fire_probability = 0.8;  // per edge pixel per step
  double noise_fraction = 0.1;    // noise events relative to edge events
  std::uint64_t step_us = 1000;
  std::uint64_t seed = 1;
};

struct LabelledStream {
  EventStream stream;
  std::int32_t label = 0;
};

inline const std::vector<std::string> kMovingBarClasses{"left", "right"};

// `rightward` selects the sweep direction. Every stream has at least
// one event and is valid for its geometry.
EventStream GenerateMovingBar(const MovingBarOptions& options, bool rightward,
                              std::uint64_t seed);

// samples_per_class streams per class, class 0 = leftward, 1 = rightward,
// ordered class-major. InvalidArgument when the geometry cannot hold the bar.
std::vector<LabelledStream> GenerateMovingBarDataset(const MovingBarOptions& options);

}  // namespace evframe
