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

namespace evframe::detail {

// Row-major accumulating matrix products, C (m x n) += op(A) * op(B).
// A is m x k, B is k x n.
void GemmNN(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c);
// A is m x k, B is n x k (B transposed).
void GemmNT(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c);
// A is k x m (A transposed), B is k x n.
void GemmTN(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
            double* c);

}  // namespace evframe::detail
