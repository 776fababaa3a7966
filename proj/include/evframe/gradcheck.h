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
#include <functional>
#include <span>

namespace evframe {

inline constexpr double kGradCheckEps = 1e-5;
inline constexpr double kGradCheckFloor = 1e-8;

// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
double GradRelativeError(double analytic, double numeric);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central-difference check of `analytic` = d loss / d values. `loss` must
// read `values` in place; each coordinate is restored after probing.
GradCheckResult FiniteDifferenceCheck(const std::function<double()>& loss,
                                      std::span<double> values,
                                      std::span<const double> analytic,
                                      double eps = kGradCheckEps);

// Probing options for piecewise-smooth losses.
struct ProbeOptions {
  double eps = kGradCheckEps;
  // Use (4 D(h/2) - D(h)) / 3, which cancels the h^2 term of the central
  // difference D(h) and allows a larger step for the same truncation error.
  bool richardson = false;
  // Identifies the smooth piece evaluated by the latest loss() call (for
  // example which relu units were active). A probe that leaves the piece of
  // the unperturbed point is retried with a step ten times smaller, at most
  // max_refinements times.
  std::function<std::uint64_t()> region;
  int max_refinements = 6;
};

GradCheckResult FiniteDifferenceCheck(const std::function<double()>& loss,
                                      std::span<double> values,
                                      std::span<const double> analytic,
                                      const ProbeOptions& options);

// Folds several results into the worst one.
GradCheckResult WorstOf(const GradCheckResult& a, const GradCheckResult& b);

}  // namespace evframe
