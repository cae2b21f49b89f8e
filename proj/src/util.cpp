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

#include "enasfarm/util.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "enasfarm/errors.hpp"
#include "enasfarm/fitness.hpp"

namespace enasfarm {

// ---------------------------------------------------------------- Fitness

Fitness Fitness::from_centi(std::int64_t centi) {
  if (centi < 0) centi = 0;
  if (centi > kMaxCenti) centi = kMaxCenti;
  return Fitness(static_cast<std::int32_t>(centi));
}

Fitness Fitness::from_percent(double percent) {
  if (!std::isfinite(percent)) return Fitness(0);
  return from_centi(std::llround(percent * 100.0));
}

Fitness Fitness::parse(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot > 3 || text.size() != dot + 3) {
    throw ParseError("malformed fitness value '" + std::string(text) + "'");
  }
  std::int64_t whole = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == dot) continue;
    const char c = text[i];
    if (c < '0' || c > '9') throw ParseError("malformed fitness value '" + std::string(text) + "'");
    whole = whole * 10 + (c - '0');
  }
  if (whole > kMaxCenti) throw ParseError("fitness above 100: '" + std::string(text) + "'");
  return Fitness(static_cast<std::int32_t>(whole));
}

std::string Fitness::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%d.%02d", centi_ / 100, centi_ % 100);
  return buf;
}

// ---------------------------------------------------------------- hashing

std::uint64_t hex_prefix64(std::string_view hex) {
  std::uint64_t value = 0;
  const auto n = std::min<std::size_t>(16, hex.size());
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + n, value, 16);
  if (ec != std::errc() || ptr != hex.data() + n) throw ParseError("not a hex digest: " + std::string(hex));
  return value;
}

std::string sha224_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha224(), nullptr) != 1) {
    throw Error("SHA-224 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = kHex[digest[i] >> 4];
    out[2 * i + 1] = kHex[digest[i] & 0xf];
  }
  return out;
}

// ---------------------------------------------------------------- strings

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

bool starts_with(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  if (text.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string copy(text);
  char* end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

// ---------------------------------------------------------------- files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (f == nullptr) throw PersistError("cannot create " + tmp.string());
    const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() &&
                    std::fflush(f) == 0 && ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw PersistError("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw PersistError("cannot rename into " + path.string());
  }
}

void append_line(const std::filesystem::path& path, std::string_view line) {
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (f == nullptr) throw PersistError("cannot open " + path.string() + " for append");
  const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() &&
                  std::fputc('\n', f) != EOF && std::fflush(f) == 0;
  std::fclose(f);
  if (!ok) throw PersistError("cannot append to " + path.string());
}

}  // namespace enasfarm
