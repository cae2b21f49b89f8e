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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace enasfarm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by `tag` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix64(mix64(master) ^ (tag * 0xd1b54a32d192ed03ULL));
}

/// First 16 hex digits of a digest as an integer.
std::uint64_t hex_prefix64(std::string_view hex);

/// Lowercase hex SHA-224 of `bytes` (56 characters).
std::string sha224_hex(std::string_view bytes);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

/// Strict decimal parse of the whole string; nullopt on any junk.
std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<double> parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes a sibling temp file, flushes it and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Appends `line` plus '\n' and flushes. Throws PersistError on failure.
void append_line(const std::filesystem::path& path, std::string_view line);

std::string format_fixed(double value, int decimals);

}  // namespace enasfarm
