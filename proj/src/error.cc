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


#include "evframe/error.h"

namespace evframe {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorKind::kOutOfBounds: return "OutOfBounds";
    case ErrorKind::kInvalidPolarity: return "InvalidPolarity";
    case ErrorKind::kEmptyStream: return "EmptyStream";
    case ErrorKind::kTruncatedRecord: return "TruncatedRecord";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::kCountMismatch: return "CountMismatch";
    case ErrorKind::kTooFewEvents: return "TooFewEvents";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kDegenerateBatch: return "DegenerateBatch";
    case ErrorKind::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kConfigDigestMismatch: return "ConfigDigestMismatch";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind),
      detail_(message) {}

NonMonotonicTimestamps::NonMonotonicTimestamps(std::size_t index)
    : Error(ErrorKind::kNonMonotonicTimestamps,
            "timestamp decreases at event " + std::to_string(index)),
      index_(index) {}

OutOfBounds::OutOfBounds(std::size_t index, std::uint32_t x, std::uint32_t y)
    : Error(ErrorKind::kOutOfBounds,
            "event " + std::to_string(index) + " at (" + std::to_string(x) +
                ", " + std::to_string(y) + ") outside sensor geometry"),
      index_(index),
      x_(x),
      y_(y) {}

TruncatedRecord::TruncatedRecord(std::size_t offset, const std::string& what)
    : Error(ErrorKind::kTruncatedRecord,
            what + " at byte offset " + std::to_string(offset)),
      offset_(offset) {}

}  // namespace evframe
