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

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "enasfarm/fitness.hpp"
#include "enasfarm/genotype.hpp"

namespace enasfarm {

/// Identifier -> fitness memo backed by an append-only text file:
///
///   #traincfg=<digest of train.ini>
///   <56 hex> = 90.50
///
/// The first value written for an identifier wins. Thread-safe.
class FitnessCache {
 public:
  /// Creates the file with its header or loads an existing one. Throws
  /// CacheMismatchError when the stored digest differs from `digest`.
  FitnessCache(std::filesystem::path path, std::string digest);

  std::optional<Fitness> lookup(const Identifier& id) const;
  /// Appends a line unless `id` is present. Returns true when written.
  bool insert(const Identifier& id, Fitness fitness);
  std::size_t size() const;

  /// Re-reads the file, e.g. after another writer appended to it.
  void reload();

  const std::filesystem::path& path() const { return path_; }
  const std::string& digest() const { return digest_; }

  static std::string format_line(const Identifier& id, Fitness fitness);

 private:
  void load_locked();

  std::filesystem::path path_;
  std::string digest_;
  mutable std::mutex mu_;
  std::unordered_map<Identifier, Fitness> entries_;
};

}  // namespace enasfarm
