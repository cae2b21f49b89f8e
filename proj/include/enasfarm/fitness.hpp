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

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace enasfarm {

/// Classification accuracy quantized to hundredths of a percent.
///
/// Every fitness that enters the system passes through this type, so the
/// value held in memory is exactly the value written to population logs and
/// the cache file ("90.42"). A resumed run therefore compares the same
/// numbers as the uninterrupted one.
class Fitness {
 public:
  static constexpr std::int32_t kMaxCenti = 100 * 100;

  constexpr Fitness() = default;

  static Fitness from_centi(std::int64_t centi);
  /// `percent` in [0, 100]; rounded half away from zero, clamped.
  static Fitness from_percent(double percent);
  /// `accuracy` in [0, 1].
  static Fitness from_accuracy(double accuracy) { return from_percent(accuracy * 100.0); }
  /// Parses "dd.dd" (one to three integer digits, exactly two decimals).
  static Fitness parse(std::string_view text);

  constexpr std::int32_t centi() const { return centi_; }
  constexpr double percent() const { return centi_ / 100.0; }
  constexpr double accuracy() const { return centi_ / 10000.0; }

  /// "dd.dd"
  std::string to_string() const;

  constexpr auto operator<=>(const Fitness&) const = default;

 private:
  explicit constexpr Fitness(std::int32_t centi) : centi_(centi) {}
  std::int32_t centi_ = 0;
};

}  // namespace enasfarm
