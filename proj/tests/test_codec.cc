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


#include <random>

#include "doctest.h"
#include "evframe/codec.h"
#include "evframe/error.h"
#include "generators.h"
#include "oracles.h"
#include "temp_dir.h"

namespace evframe {
namespace {

using testing::RandomStream;
using testing::TempDir;
using testing::Uniform;

ErrorKind KindOf(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kIo;
}

TEST_SUITE("codec") {

TEST_CASE("atis record bit fields") {
  const Bytes bytes{0x03, 0x04, 0x80, 0x00, 0x0A};
  const EventStream s = DecodeAtisBin(bytes, kAtisGeometry);
  REQUIRE(s.size() == 1);
  CHECK(s.events[0] == Event{3, 4, 10, 1});
}

TEST_CASE("atis zero record") {
  const EventStream s = DecodeAtisBin(Bytes(5, 0), kAtisGeometry);
  REQUIRE(s.size() == 1);
  CHECK(s.events[0] == Event{0, 0, 0, 0});
}

TEST_CASE("atis timestamp wrap is unwrapped") {
  Bytes bytes;
  oracle::AppendAtisRecord(bytes, 1, 1, 0, (1u << 23) - 5);
  oracle::AppendAtisRecord(bytes, 2, 2, 1, 7);
  const EventStream s = DecodeAtisBin(bytes, kAtisGeometry);
  REQUIRE(s.size() == 2);
  CHECK(s.events[1].t == 7 + (std::uint64_t{1} << 23));
}

TEST_CASE("atis random fixtures match the scalar unwrap oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = Uniform(rng, 1, 500);
    Bytes bytes;
    std::vector<std::uint64_t> raw;
    std::vector<Event> expected;
    std::uint32_t ts = static_cast<std::uint32_t>(Uniform(rng, 0, (1u << 23) - 1));
    for (std::size_t i = 0; i < n; ++i) {
      // Large steps force several wraps per stream.
      ts = static_cast<std::uint32_t>((ts + Uniform(rng, 0, 1u << 21)) % (1u << 23));
      const auto x = static_cast<std::uint8_t>(Uniform(rng, 0, 255));
      const auto y = static_cast<std::uint8_t>(Uniform(rng, 0, 239));
      const auto p = static_cast<std::uint8_t>(rng() & 1);
      oracle::AppendAtisRecord(bytes, x, y, p, ts);
      raw.push_back(ts);
      expected.push_back({x, y, 0, p});
    }
    const auto unwrapped = oracle::UnwrapScalar(raw, std::uint64_t{1} << 23);
    for (std::size_t i = 0; i < n; ++i) expected[i].t = unwrapped[i];
    const EventStream s = DecodeAtisBin(bytes, kAtisGeometry);
    CHECK(s.events == expected);
    CHECK(UnwrapTimestamps(raw, std::uint64_t{1} << 23) == unwrapped);
  }
}

TEST_CASE("atis truncated length") {
  const Bytes bytes(7, 0);
  try {
    DecodeAtisBin(bytes, kAtisGeometry);
    FAIL("expected TruncatedRecord");
  } catch (const TruncatedRecord& e) {
    CHECK(e.offset() == 5);
  }
}

TEST_CASE("atis out of geometry") {
  Bytes bytes;
  oracle::AppendAtisRecord(bytes, 50, 5, 0, 1);
  CHECK_THROWS_AS(DecodeAtisBin(bytes, {32, 32}), OutOfBounds);
}

TEST_CASE("aedat record from inverse bit layout") {
  Bytes bytes;
  oracle::AppendAedatRecord(bytes, 5, 9, 1, 42);
  const EventStream s = DecodeAedat2(bytes);
  REQUIRE(s.size() == 1);
  CHECK(s.events[0] == Event{5, 9, 42, 1});
  CHECK(s.geometry == kDvs128Geometry);
}

TEST_CASE("aedat zero record") {
  const EventStream s = DecodeAedat2(Bytes(8, 0));
  REQUIRE(s.size() == 1);
  CHECK(s.events[0] == Event{0, 0, 0, 0});
}

TEST_CASE("aedat header only gives an empty stream") {
  const std::string header = "#!AER-DAT2.0\r\n# comment\r\n";
  const Bytes bytes(header.begin(), header.end());
  CHECK(DecodeAedat2(bytes).empty());
}

TEST_CASE("aedat header errors") {
  const std::string v3 = "#!AER-DAT3.1\r\n";
  CHECK(KindOf([&] { DecodeAedat2(Bytes(v3.begin(), v3.end())); }) ==
        ErrorKind::kUnsupportedVersion);
  const std::string open = "#!AER-DAT2.0";
  CHECK(KindOf([&] { DecodeAedat2(Bytes(open.begin(), open.end())); }) ==
        ErrorKind::kMalformedHeader);
  const std::string ok = "#!AER-DAT2.0\n";
  Bytes partial(ok.begin(), ok.end());
  partial.resize(partial.size() + 12, 0);
  CHECK_THROWS_AS(DecodeAedat2(partial), TruncatedRecord);
}

TEST_CASE("aedat random fixtures with 32-bit wraps") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed);
    const std::string header = "#!AER-DAT2.0\r\n";
    Bytes bytes(header.begin(), header.end());
    std::vector<std::uint64_t> raw;
    std::vector<Event> expected;
    std::uint64_t ts = Uniform(rng, 0, 0xFFFFFFFFu);
    const std::size_t n = Uniform(rng, 1, 300);
    for (std::size_t i = 0; i < n; ++i) {
      ts = (ts + Uniform(rng, 0, std::uint64_t{1} << 30)) % (std::uint64_t{1} << 32);
      const auto x = static_cast<std::uint32_t>(Uniform(rng, 0, 127));
      const auto y = static_cast<std::uint32_t>(Uniform(rng, 0, 127));
      const auto p = static_cast<std::uint32_t>(rng() & 1);
      oracle::AppendAedatRecord(bytes, x, y, p, static_cast<std::uint32_t>(ts));
      raw.push_back(ts);
      expected.push_back({x, y, 0, static_cast<std::uint8_t>(p)});
    }
    const auto unwrapped = oracle::UnwrapScalar(raw, std::uint64_t{1} << 32);
    for (std::size_t i = 0; i < n; ++i) expected[i].t = unwrapped[i];
    CHECK(DecodeAedat2(bytes).events == expected);
  }
}

TEST_CASE("aedat encode then decode") {
  std::mt19937_64 rng(3);
  const EventStream s = RandomStream(rng, 400, kDvs128Geometry);
  CHECK(DecodeAedat2(EncodeAedat2(s)).events == s.events);
}

TEST_CASE("portable empty stream") {
  EventStream s;
  s.geometry = {10, 20};
  const Bytes bytes = EncodePortable(s);
  CHECK(bytes.size() == kPortableHeaderSize);
  CHECK(DecodePortable(bytes) == s);
}

TEST_CASE("portable round trip on random streams") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    std::mt19937_64 rng(seed);
    EventStream s = RandomStream(rng, Uniform(rng, 0, 300), testing::RandomGeometry(rng, 1024),
                                 Uniform(rng, 0, 1u << 20));
    if (rng() & 1) s.label = static_cast<std::int32_t>(Uniform(rng, 0, 100));
    const Bytes bytes = EncodePortable(s);
    CHECK(bytes.size() == kPortableHeaderSize + s.size() * kPortableRecordSize);
    CHECK(DecodePortable(bytes) == s);
    // Same bytes decode identically.
    CHECK(DecodePortable(bytes) == DecodePortable(bytes));
  }
}

TEST_CASE("portable round trip on a large stream") {
  std::mt19937_64 rng(99);
  const EventStream s = RandomStream(rng, 1000000, {346, 260});
  CHECK(DecodePortable(EncodePortable(s)) == s);
}

TEST_CASE("portable corruption") {
  std::mt19937_64 rng(5);
  EventStream s = RandomStream(rng, 5, {16, 16});
  Bytes bytes = EncodePortable(s);

  Bytes magic = bytes;
  magic[0] = 'X';
  CHECK(KindOf([&] { DecodePortable(magic); }) == ErrorKind::kBadMagic);

  Bytes version = bytes;
  version[8] = 9;
  CHECK(KindOf([&] { DecodePortable(version); }) == ErrorKind::kUnsupportedVersion);

  Bytes missing = bytes;
  missing.resize(missing.size() - kPortableRecordSize);
  CHECK(KindOf([&] { DecodePortable(missing); }) == ErrorKind::kCountMismatch);

  Bytes partial = bytes;
  partial.resize(partial.size() - 3);
  CHECK(KindOf([&] { DecodePortable(partial); }) == ErrorKind::kTruncatedRecord);

  Bytes header = bytes;
  header.resize(12);
  CHECK(KindOf([&] { DecodePortable(header); }) == ErrorKind::kTruncatedRecord);
}

TEST_CASE("portable decode validates the stream") {
  EventStream s;
  s.geometry = {4, 4};
  s.events = {{1, 1, 10, 0}, {1, 1, 5, 0}};
  // Encoding does not validate, so an out-of-order payload reaches the decoder.
  CHECK_THROWS_AS(DecodePortable(EncodePortable(s)), NonMonotonicTimestamps);
}

TEST_CASE("format names and extensions") {
  CHECK(ParseEventFormat("atis-bin") == EventFormat::kAtisBin);
  CHECK(ParseEventFormat("aedat2") == EventFormat::kAedat2);
  CHECK(ParseEventFormat("evt") == EventFormat::kPortable);
  CHECK_THROWS_AS(ParseEventFormat("mp4"), Error);
  CHECK(FormatFromExtension("a/b.bin") == EventFormat::kAtisBin);
  CHECK(FormatFromExtension("a/b.aedat") == EventFormat::kAedat2);
  CHECK(FormatFromExtension("b.evt") == EventFormat::kPortable);
  CHECK_FALSE(FormatFromExtension("b.txt").has_value());
}

TEST_CASE("flip polarity option") {
  Bytes bytes;
  oracle::AppendAtisRecord(bytes, 1, 1, 1, 3);
  DecodeOptions options;
  options.flip_polarity = true;
  CHECK(DecodeEvents(bytes, EventFormat::kAtisBin, options).events[0].p == 0);
}

TEST_CASE("file round trip and class directory listing") {
  TempDir dir("codec");
  std::mt19937_64 rng(11);
  for (const char* cls : {"zebra", "apple"}) {
    std::filesystem::create_directories(dir / cls);
    for (int i = 0; i < 2; ++i) {
      WriteEventFile(dir.path() / cls / ("s" + std::to_string(i) + ".evt"),
                     RandomStream(rng, 10, {8, 8}));
    }
  }
  std::vector<std::string> classes;
  const auto entries = ListClassDirectory(dir.path(), ".evt", &classes);
  CHECK(classes == std::vector<std::string>{"apple", "zebra"});
  REQUIRE(entries.size() == 4);
  CHECK(entries[0].label == 0);
  CHECK(entries[3].label == 1);
  CHECK(entries[3].class_name == "zebra");
  const EventStream back = ReadEventFile(entries[0].path, EventFormat::kPortable);
  CHECK(back.size() == 10);
  CHECK_THROWS_AS(ReadEventFile(dir / "missing.evt", EventFormat::kPortable), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace evframe
