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


#include "evframe/parallel.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace evframe {

namespace {

std::size_t ThreadsFromEnvironment() {
  const char* value = std::getenv("EVFRAME_THREADS");
  if (!value) return 1;
  try {
    const long parsed = std::stol(value);
    return parsed > 0 ? static_cast<std::size_t>(parsed) : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

std::atomic<std::size_t>& ThreadSetting() {
  static std::atomic<std::size_t> threads{ThreadsFromEnvironment()};
  return threads;
}

}  // namespace

std::size_t WorkerThreads() { return ThreadSetting().load(); }

void SetWorkerThreads(std::size_t threads) { ThreadSetting() = std::max<std::size_t>(1, threads); }

void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::min(WorkerThreads(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace evframe
