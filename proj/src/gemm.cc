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


#include "gemm.h"

#include <algorithm>

namespace evframe::detail {

namespace {
constexpr std::size_t kBlockK = 128;
constexpr std::size_t kBlockN = 512;
}  // namespace

void GemmNN(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c) {
  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t k1 = std::min(k, k0 + kBlockK);
    for (std::size_t j0 = 0; j0 < n; j0 += kBlockN) {
      const std::size_t j1 = std::min(n, j0 + kBlockN);
      for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t p = k0; p < k1; ++p) {
          const double av = arow[p];
          if (av == 0.0) continue;
          const double* brow = b + p * n;
          for (std::size_t j = j0; j < j1; ++j) crow[j] += av * brow[j];
        }
      }
    }
  }
}

void GemmNT(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        acc0 += arow[p] * brow[p];
        acc1 += arow[p + 1] * brow[p + 1];
        acc2 += arow[p + 2] * brow[p + 2];
        acc3 += arow[p + 3] * brow[p + 3];
      }
      for (; p < k; ++p) acc0 += arow[p] * brow[p];
      crow[j] += (acc0 + acc1) + (acc2 + acc3);
    }
  }
}

void GemmTN(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace evframe::detail
