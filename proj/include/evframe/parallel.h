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
#include <functional>

namespace evframe {

// Worker count used by data-parallel loops. Defaults to the EVFRAME_THREADS
// environment variable, or 1 when unset.
std::size_t WorkerThreads();
void SetWorkerThreads(std::size_t threads);

// Runs body(i) for i in [0, count) over up to WorkerThreads() threads. Work
// items are independent; any reduction must happen in the caller in index
// order so results do not depend on the thread count.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace evframe
