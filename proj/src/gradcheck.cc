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


#include "evframe/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "evframe/error.h"

namespace evframe {

double GradRelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult FiniteDifferenceCheck(const std::function<double()>& loss,
                                      std::span<double> values,
                                      std::span<const double> analytic, double eps) {
  if (values.size() != analytic.size()) {
    throw Error(ErrorKind::kShapeMismatch, "analytic gradient size differs from parameter size");
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double plus = loss();
    values[i] = saved - eps;
    const double minus = loss();
    values[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double err = GradRelativeError(analytic[i], numeric);
    if (err > result.max_rel_error || i == 0) {
      result = {std::max(err, result.max_rel_error), i, analytic[i], numeric};
    }
  }
  return result;
}

GradCheckResult FiniteDifferenceCheck(const std::function<double()>& loss,
                                      std::span<double> values,
                                      std::span<const double> analytic,
                                      const ProbeOptions& options) {
  if (values.size() != analytic.size()) {
    throw Error(ErrorKind::kShapeMismatch, "analytic gradient size differs from parameter size");
  }
  std::uint64_t base_region = 0;
  if (options.region) {
    loss();
    base_region = options.region();
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    bool same_piece = true;
    auto at = [&](double offset) {
      values[i] = saved + offset;
      const double v = loss();
      if (options.region && options.region() != base_region) same_piece = false;
      return v;
    };
    auto central = [&](double h) { return (at(h) - at(-h)) / (2.0 * h); };

    double h = options.eps;
    double numeric = 0.0;
    for (int attempt = 0; attempt <= options.max_refinements; ++attempt, h /= 10.0) {
      same_piece = true;
      numeric = options.richardson ? (4.0 * central(h / 2.0) - central(h)) / 3.0 : central(h);
      if (same_piece) break;
    }
    values[i] = saved;
    const double err = GradRelativeError(analytic[i], numeric);
    if (err > result.max_rel_error || i == 0) {
      result = {std::max(err, result.max_rel_error), i, analytic[i], numeric};
    }
  }
  return result;
}

GradCheckResult WorstOf(const GradCheckResult& a, const GradCheckResult& b) {
  return b.max_rel_error > a.max_rel_error ? b : a;
}

}  // namespace evframe
