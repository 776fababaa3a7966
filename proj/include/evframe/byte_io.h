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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evframe/error.h"

namespace evframe {

using Bytes = std::vector<std::uint8_t>;

Bytes ReadFileBytes(const std::filesystem::path& path);
// Writes via a sibling temporary file and renames, so readers never observe
// a half-written file.
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
inline void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Little-endian append-only encoder.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { buffer_.push_back(v); }
  void U16(std::uint16_t v) { Le(v); }
  void U32(std::uint32_t v) { Le(v); }
  void U64(std::uint64_t v) { Le(v); }
  void I32(std::int32_t v) { Le(static_cast<std::uint32_t>(v)); }
  void F64(double v) { Le(std::bit_cast<std::uint64_t>(v)); }
  void Raw(std::string_view s) { buffer_.insert(buffer_.end(), s.begin(), s.end()); }

  Bytes& buffer() { return buffer_; }
  Bytes Take() { return std::move(buffer_); }

 private:
  template <typename T>
  void Le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  Bytes buffer_;
};

// Little-endian cursor over a byte span. Reading past the end throws
// TruncatedRecord carrying the offset of the failed read.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t U8() { return Le<std::uint8_t>(); }
  std::uint16_t U16() { return Le<std::uint16_t>(); }
  std::uint32_t U32() { return Le<std::uint32_t>(); }
  std::uint64_t U64() { return Le<std::uint64_t>(); }
  std::int32_t I32() { return static_cast<std::int32_t>(Le<std::uint32_t>()); }
  double F64() { return std::bit_cast<double>(Le<std::uint64_t>()); }
  float F32() { return std::bit_cast<float>(Le<std::uint32_t>()); }
  std::string Raw(std::size_t n) {
    Require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), n);
    offset_ += n;
    return s;
  }

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  void Require(std::size_t n) const {
    if (remaining() < n) throw TruncatedRecord(offset_, "unexpected end of data");
  }
  template <typename T>
  T Le() {
    Require(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(bytes_[offset_ + i]) << (8 * i));
    }
    offset_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

}  // namespace evframe
