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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evframe/byte_io.h"
#include "evframe/event.h"

namespace evframe {

enum class EventFormat { kAtisBin, kAedat2, kPortable };

// Accepts the CLI spellings "atis-bin", "aedat2" and "evt".
EventFormat ParseEventFormat(std::string_view name);
std::string_view EventFormatName(EventFormat format);
std::string_view EventFormatExtension(EventFormat format);
// Guesses from the file extension (.bin, .aedat, .evt).
std::optional<EventFormat> FormatFromExtension(const std::filesystem::path& path);

inline constexpr SensorGeometry kAtisGeometry{304, 240};
inline constexpr SensorGeometry kDvs128Geometry{128, 128};

// ATIS .bin: 5-byte records. byte0 = x, byte1 = y, bit 7 of byte2 =
// polarity, the remaining 23 bits (big-endian) = timestamp in microseconds.
// Timestamp wraparound at 2^23 is unwrapped into a monotone 64-bit clock.
EventStream DecodeAtisBin(std::span<const std::uint8_t> bytes, SensorGeometry geometry);
Bytes EncodeAtisBin(const EventStream& stream);

// AEDAT 2.0 with DVS128 addressing: '#'-prefixed ASCII header lines, then
// 8-byte big-endian records (u32 address, u32 timestamp).
// x = (addr >> 1) & 0x7F, y = (addr >> 8) & 0x7F, p = addr & 1.
EventStream DecodeAedat2(std::span<const std::uint8_t> bytes);
Bytes EncodeAedat2(const EventStream& stream);

// Portable .evt layout, all little-endian:
//   "EVSTRM01" | version u16 | width u16 | height u16 | label i32 (-1 absent)
//   | count u64 | count x (x u16, y u16, p u8, t u64)
inline constexpr std::string_view kPortableMagic = "EVSTRM01";
inline constexpr std::uint16_t kPortableVersion = 1;
inline constexpr std::size_t kPortableHeaderSize = 26;
inline constexpr std::size_t kPortableRecordSize = 13;

Bytes EncodePortable(const EventStream& stream);
EventStream DecodePortable(std::span<const std::uint8_t> bytes);

struct DecodeOptions {
  // Geometry for formats that do not carry one (ATIS .bin).
  SensorGeometry geometry = kAtisGeometry;
  bool flip_polarity = false;
};

EventStream DecodeEvents(std::span<const std::uint8_t> bytes, EventFormat format,
                         const DecodeOptions& options = {});
EventStream ReadEventFile(const std::filesystem::path& path, EventFormat format,
                          const DecodeOptions& options = {});
void WriteEventFile(const std::filesystem::path& path, const EventStream& stream);

// Adds one period to every timestamp that follows a decrease of the raw
// counter. `raw` values must lie in [0, period).
std::vector<std::uint64_t> UnwrapTimestamps(std::span<const std::uint64_t> raw,
                                            std::uint64_t period);

struct DatasetEntry {
  std::filesystem::path path;
  std::string class_name;
  std::int32_t label = -1;
};

// Lists `<root>/<class_name>/<sample>.<ext>`. Labels are the index of the
// class directory name in sorted order; samples are sorted by path.
std::vector<DatasetEntry> ListClassDirectory(const std::filesystem::path& root,
                                             std::string_view extension,
                                             std::vector<std::string>* class_names = nullptr);

}  // namespace evframe
