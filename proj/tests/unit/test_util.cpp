// Copyright 2026 The enasfarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "enasfarm/errors.hpp"
#include "enasfarm/fitness.hpp"
#include "enasfarm/util.hpp"
#include "ref_sha224.hpp"
#include "temp_dir.hpp"

namespace enasfarm {
namespace {

TEST(Fitness, FormatsTwoDecimals) {
  EXPECT_EQ(Fitness::from_accuracy(0.9042).to_string(), "90.42");
  EXPECT_EQ(Fitness::from_percent(90.5).to_string(), "90.50");
  EXPECT_EQ(Fitness::from_percent(0).to_string(), "0.00");
  EXPECT_EQ(Fitness::from_percent(100).to_string(), "100.00");
  EXPECT_EQ(Fitness::from_percent(7.005).centi(), std::llround(7.005 * 100.0));
}

TEST(Fitness, ClampsAndRejectsJunk) {
  EXPECT_EQ(Fitness::from_percent(150).centi(), 10000);
  EXPECT_EQ(Fitness::from_percent(-3).centi(), 0);
  EXPECT_EQ(Fitness::from_percent(NAN).centi(), 0);
  for (const char* bad : {"", "90", "90.5", "90.500", "1000.00", ".50", "9a.00", "-1.00"}) {
    EXPECT_THROW(Fitness::parse(bad), ParseError) << bad;
  }
}

TEST(Fitness, ParseFormatRoundTripWithinHalfCenti) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double a = u(rng);
    const auto f = Fitness::from_accuracy(a);
    const auto back = Fitness::parse(f.to_string());
    EXPECT_EQ(back, f);
    EXPECT_LE(std::abs(back.accuracy() - a), 0.00005 + 1e-12);
  }
}

TEST(Sha224, AgreesWithReferenceOnRandomInputs) {
  std::mt19937_64 rng(42);
  for (int len = 0; len < 300; ++len) {
    std::string s(static_cast<std::size_t>(len), '\0');
    for (auto& c : s) c = static_cast<char>(rng() & 0xff);
    ASSERT_EQ(sha224_hex(s), testing::ref_sha224_hex(s)) << len;
  }
  EXPECT_EQ(sha224_hex(""), "d14a028c2a3a2bc9476102bb288234c415a2b01f828ea62ac5b3e42f");
}

TEST(Mix64, SplitMix64FirstOutput) {
  // splitmix64 seeded with 0 emits 0xe220a8397b1dcdaf first.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

TEST(HexPrefix, FirstSixteenDigits) {
  EXPECT_EQ(hex_prefix64("ffffffffffffffff0000"), ~0ULL);
  EXPECT_EQ(hex_prefix64("0000000000000001ff"), 1ULL);
}

TEST(Strings, SplitTrimParse) {
  EXPECT_EQ(split("a,b,,c", ','), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(trim("  x y \t\n"), "x y");
  EXPECT_EQ(parse_int("42"), 42);
  EXPECT_EQ(parse_int("-7"), -7);
  EXPECT_FALSE(parse_int("4 2"));
  EXPECT_FALSE(parse_int("0x10"));
  EXPECT_FALSE(parse_int(""));
  EXPECT_EQ(parse_double("0.25"), 0.25);
  EXPECT_FALSE(parse_double("1e"));
  EXPECT_TRUE(starts_with("begin_3.txt", "begin_"));
  EXPECT_EQ(format_fixed(1.0 / 3.0, 4), "0.3333");
}

TEST(Files, AtomicWriteLeavesNoTemporaries) {
  testing::TempDir dir("util");
  const auto p = dir / "f.txt";
  write_file_atomic(p, "one\n");
  write_file_atomic(p, "two\n");
  EXPECT_EQ(read_file(p), "two\n");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1);
  append_line(p, "three");
  EXPECT_EQ(read_file(p), "two\nthree\n");
  EXPECT_THROW(write_file_atomic(dir / "missing/x.txt", "y"), PersistError);
  EXPECT_THROW(read_file(dir / "nope"), Error);
}

}  // namespace
}  // namespace enasfarm
