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
#include <stdexcept>
#include <string>

namespace evframe {

enum class ErrorKind {
  kNonMonotonicTimestamps,
  kOutOfBounds,
  kInvalidPolarity,
  kEmptyStream,
  kTruncatedRecord,
  kMalformedHeader,
  kBadMagic,
  kUnsupportedVersion,
  kCountMismatch,
  kTooFewEvents,
  kShapeMismatch,
  kDegenerateBatch,
  kLabelOutOfRange,
  kInvalidConfig,
  kEmptyDataset,
  kConfigDigestMismatch,
  kInvalidArgument,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// Base of every error raised by the library. `what()` is prefixed with the
// kind name so CLI reports stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

class NonMonotonicTimestamps : public Error {
 public:
  explicit NonMonotonicTimestamps(std::size_t index);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class OutOfBounds : public Error {
 public:
  OutOfBounds(std::size_t index, std::uint32_t x, std::uint32_t y);
  std::size_t index() const { return index_; }
  std::uint32_t x() const { return x_; }
  std::uint32_t y() const { return y_; }

 private:
  std::size_t index_;
  std::uint32_t x_;
  std::uint32_t y_;
};

// Decode failure at a known byte offset of the input.
class TruncatedRecord : public Error {
 public:
  TruncatedRecord(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace evframe
