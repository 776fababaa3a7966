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


#include "evframe/codec.h"

#include <algorithm>
#include <map>

#include "evframe/error.h"

namespace evframe {

namespace {

constexpr std::uint64_t kAtisPeriod = std::uint64_t{1} << 23;
constexpr std::uint64_t kAedatPeriod = std::uint64_t{1} << 32;
constexpr std::size_t kAtisRecordSize = 5;
constexpr std::size_t kAedatRecordSize = 8;

std::uint32_t ReadBe32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void WriteBe32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

bool IsHeaderChar(std::uint8_t c) { return c == '\t' || c == '\r' || (c >= 0x20 && c < 0x7F); }

// Returns the offset of the first record.
std::size_t ParseAedatHeader(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] == '#') {
    auto nl = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(),
                        std::uint8_t{'\n'});
    if (nl == bytes.end()) {
      throw Error(ErrorKind::kMalformedHeader,
                  "unterminated header line at byte offset " + std::to_string(pos));
    }
    const std::size_t end = static_cast<std::size_t>(nl - bytes.begin());
    std::string line;
    for (std::size_t i = pos; i < end; ++i) {
      if (!IsHeaderChar(bytes[i])) {
        throw Error(ErrorKind::kMalformedHeader,
                    "non-ASCII byte in header at byte offset " + std::to_string(i));
      }
      if (bytes[i] != '\r') line.push_back(static_cast<char>(bytes[i]));
    }
    constexpr std::string_view kVersionTag = "#!AER-DAT";
    if (line.rfind(kVersionTag, 0) == 0) {
      const std::string version = line.substr(kVersionTag.size());
      if (version.rfind("2.", 0) != 0) {
        throw Error(ErrorKind::kUnsupportedVersion,
                    "AEDAT version " + version + " (only 2.x is supported)");
      }
    }
    pos = end + 1;
  }
  return pos;
}

}  // namespace

EventFormat ParseEventFormat(std::string_view name) {
  if (name == "atis-bin" || name == "bin") return EventFormat::kAtisBin;
  if (name == "aedat2" || name == "aedat") return EventFormat::kAedat2;
  if (name == "evt") return EventFormat::kPortable;
  throw Error(ErrorKind::kInvalidArgument, "unknown event format '" + std::string(name) + "'");
}

std::string_view EventFormatName(EventFormat format) {
  switch (format) {
    case EventFormat::kAtisBin: return "atis-bin";
    case EventFormat::kAedat2: return "aedat2";
    case EventFormat::kPortable: return "evt";
  }
  return "?";
}

std::string_view EventFormatExtension(EventFormat format) {
  switch (format) {
    case EventFormat::kAtisBin: return ".bin";
    case EventFormat::kAedat2: return ".aedat";
    case EventFormat::kPortable: return ".evt";
  }
  return "";
}

std::optional<EventFormat> FormatFromExtension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".bin") return EventFormat::kAtisBin;
  if (ext == ".aedat") return EventFormat::kAedat2;
  if (ext == ".evt") return EventFormat::kPortable;
  return std::nullopt;
}

std::vector<std::uint64_t> UnwrapTimestamps(std::span<const std::uint64_t> raw,
                                            std::uint64_t period) {
  std::vector<std::uint64_t> out(raw.size());
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && raw[i] < raw[i - 1]) offset += period;
    out[i] = raw[i] + offset;
  }
  return out;
}

EventStream DecodeAtisBin(std::span<const std::uint8_t> bytes, SensorGeometry geometry) {
  CheckGeometry(geometry);
  if (bytes.size() % kAtisRecordSize != 0) {
    throw TruncatedRecord(bytes.size() - bytes.size() % kAtisRecordSize,
                          "partial 5-byte ATIS record");
  }
  const std::size_t n = bytes.size() / kAtisRecordSize;
  EventStream stream;
  stream.geometry = geometry;
  stream.events.resize(n);
  std::uint64_t offset = 0;
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* r = bytes.data() + i * kAtisRecordSize;
    const std::uint64_t raw =
        (std::uint64_t{r[2] & 0x7Fu} << 16) | (std::uint64_t{r[3]} << 8) | r[4];
    if (i > 0 && raw < previous) offset += kAtisPeriod;
    previous = raw;
    Event& e = stream.events[i];
    e.x = r[0];
    e.y = r[1];
    e.p = static_cast<std::uint8_t>(r[2] >> 7);
    e.t = raw + offset;
  }
  ValidateStream(stream);
  return stream;
}

Bytes EncodeAtisBin(const EventStream& stream) {
  Bytes out;
  out.reserve(stream.size() * kAtisRecordSize);
  for (const Event& e : stream.events) {
    if (e.x > 0xFF || e.y > 0xFF || e.p > 1) {
      throw Error(ErrorKind::kInvalidArgument, "event does not fit the ATIS record layout");
    }
    const std::uint64_t t = e.t % kAtisPeriod;
    out.push_back(static_cast<std::uint8_t>(e.x));
    out.push_back(static_cast<std::uint8_t>(e.y));
    out.push_back(static_cast<std::uint8_t>((e.p << 7) | ((t >> 16) & 0x7F)));
    out.push_back(static_cast<std::uint8_t>(t >> 8));
    out.push_back(static_cast<std::uint8_t>(t));
  }
  return out;
}

EventStream DecodeAedat2(std::span<const std::uint8_t> bytes) {
  const std::size_t start = ParseAedatHeader(bytes);
  const std::size_t payload = bytes.size() - start;
  if (payload % kAedatRecordSize != 0) {
    throw TruncatedRecord(bytes.size() - payload % kAedatRecordSize,
                          "partial 8-byte AEDAT record");
  }
  const std::size_t n = payload / kAedatRecordSize;
  EventStream stream;
  stream.geometry = kDvs128Geometry;
  stream.events.resize(n);
  std::uint64_t offset = 0;
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* r = bytes.data() + start + i * kAedatRecordSize;
    const std::uint32_t addr = ReadBe32(r);
    const std::uint64_t raw = ReadBe32(r + 4);
    if (i > 0 && raw < previous) offset += kAedatPeriod;
    previous = raw;
    Event& e = stream.events[i];
    e.x = (addr >> 1) & 0x7F;
    e.y = (addr >> 8) & 0x7F;
    e.p = static_cast<std::uint8_t>(addr & 0x1);
    e.t = raw + offset;
  }
  ValidateStream(stream);
  return stream;
}

Bytes EncodeAedat2(const EventStream& stream) {
  constexpr std::string_view kHeader = "#!AER-DAT2.0\r\n# written by evframe\r\n";
  Bytes out(kHeader.begin(), kHeader.end());
  out.reserve(out.size() + stream.size() * kAedatRecordSize);
  for (const Event& e : stream.events) {
    if (e.x > 0x7F || e.y > 0x7F || e.p > 1) {
      throw Error(ErrorKind::kInvalidArgument, "event does not fit DVS128 addressing");
    }
    WriteBe32(out, (e.y << 8) | (e.x << 1) | e.p);
    WriteBe32(out, static_cast<std::uint32_t>(e.t % kAedatPeriod));
  }
  return out;
}

Bytes EncodePortable(const EventStream& stream) {
  if (stream.geometry.width > 0xFFFF || stream.geometry.height > 0xFFFF) {
    throw Error(ErrorKind::kInvalidArgument, "geometry exceeds 16-bit portable fields");
  }
  ByteWriter w;
  w.buffer().reserve(kPortableHeaderSize + stream.size() * kPortableRecordSize);
  w.Raw(kPortableMagic);
  w.U16(kPortableVersion);
  w.U16(static_cast<std::uint16_t>(stream.geometry.width));
  w.U16(static_cast<std::uint16_t>(stream.geometry.height));
  w.I32(stream.label.value_or(-1));
  w.U64(stream.size());
  for (const Event& e : stream.events) {
    w.U16(static_cast<std::uint16_t>(e.x));
    w.U16(static_cast<std::uint16_t>(e.y));
    w.U8(e.p);
    w.U64(e.t);
  }
  return w.Take();
}

EventStream DecodePortable(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kPortableMagic.size() || r.Raw(kPortableMagic.size()) != kPortableMagic) {
    throw Error(ErrorKind::kBadMagic, "not an EVSTRM01 portable event file");
  }
  const std::uint16_t version = r.U16();
  if (version != kPortableVersion) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "portable event format version " + std::to_string(version));
  }
  EventStream stream;
  stream.geometry.width = r.U16();
  stream.geometry.height = r.U16();
  const std::int32_t label = r.I32();
  if (label >= 0) stream.label = label;
  const std::uint64_t count = r.U64();

  const std::size_t payload = r.remaining();
  if (payload % kPortableRecordSize != 0) {
    throw TruncatedRecord(bytes.size() - payload % kPortableRecordSize,
                          "partial 13-byte portable record");
  }
  if (payload / kPortableRecordSize != count) {
    throw Error(ErrorKind::kCountMismatch,
                "header declares " + std::to_string(count) + " events, payload holds " +
                    std::to_string(payload / kPortableRecordSize));
  }
  stream.events.resize(count);
  for (Event& e : stream.events) {
    e.x = r.U16();
    e.y = r.U16();
    e.p = r.U8();
    e.t = r.U64();
  }
  ValidateStream(stream);
  return stream;
}

EventStream DecodeEvents(std::span<const std::uint8_t> bytes, EventFormat format,
                         const DecodeOptions& options) {
  EventStream stream;
  switch (format) {
    case EventFormat::kAtisBin: stream = DecodeAtisBin(bytes, options.geometry); break;
    case EventFormat::kAedat2: stream = DecodeAedat2(bytes); break;
    case EventFormat::kPortable: stream = DecodePortable(bytes); break;
  }
  if (options.flip_polarity) {
    for (Event& e : stream.events) e.p ^= 1;
  }
  return stream;
}

EventStream ReadEventFile(const std::filesystem::path& path, EventFormat format,
                          const DecodeOptions& options) {
  const Bytes bytes = ReadFileBytes(path);
  return DecodeEvents(bytes, format, options);
}

void WriteEventFile(const std::filesystem::path& path, const EventStream& stream) {
  WriteFileBytes(path, EncodePortable(stream));
}

std::vector<DatasetEntry> ListClassDirectory(const std::filesystem::path& root,
                                             std::string_view extension,
                                             std::vector<std::string>* class_names) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::kIo, "not a directory: " + root.string());
  }
  std::vector<std::string> classes;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  std::sort(classes.begin(), classes.end());

  std::vector<DatasetEntry> out;
  for (std::size_t label = 0; label < classes.size(); ++label) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / classes[label])) {
      if (entry.is_regular_file() && entry.path().extension() == extension) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (auto& f : files) {
      out.push_back({std::move(f), classes[label], static_cast<std::int32_t>(label)});
    }
  }
  if (class_names) *class_names = std::move(classes);
  return out;
}

}  // namespace evframe
