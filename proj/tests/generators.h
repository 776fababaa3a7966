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

// Hand-rolled random generators shared by the property tests.

#include <cstdint>
#include <random>
#include <vector>

#include "evframe/event.h"
#include "evframe/tensor.h"

namespace evframe::testing {

inline std::uint64_t Uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

inline double UniformReal(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Tensor RandomTensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = UniformReal(rng, lo, hi);
  return t;
}

// Valid stream: sorted timestamps (with repeats), coordinates inside geometry.
inline EventStream RandomStream(std::mt19937_64& rng, std::size_t count, SensorGeometry geometry,
                                std::uint64_t max_step_us = 50) {
  EventStream s;
  s.geometry = geometry;
  std::uint64_t t = Uniform(rng, 0, 1000);
  s.events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    t += Uniform(rng, 0, max_step_us);
    s.events.push_back({static_cast<std::uint32_t>(Uniform(rng, 0, geometry.width - 1)),
                        static_cast<std::uint32_t>(Uniform(rng, 0, geometry.height - 1)), t,
                        static_cast<std::uint8_t>(rng() & 1)});
  }
  return s;
}

inline SensorGeometry RandomGeometry(std::mt19937_64& rng, std::uint32_t max_side) {
  return {static_cast<std::uint32_t>(Uniform(rng, 1, max_side)),
          static_cast<std::uint32_t>(Uniform(rng, 1, max_side))};
}

}  // namespace evframe::testing
