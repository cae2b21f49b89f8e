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


#include "enasfarm/cache.hpp"

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace {
constexpr std::string_view kHeader = "#traincfg=";
}  // namespace

FitnessCache::FitnessCache(std::filesystem::path path, std::string digest)
    : path_(std::move(path)), digest_(std::move(digest)) {
  std::lock_guard lock(mu_);
  if (!std::filesystem::exists(path_)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    write_file_atomic(path_, std::string(kHeader) + digest_ + "\n");
  }
  load_locked();
}

std::string FitnessCache::format_line(const Identifier& id, Fitness fitness) {
  return id.hex() + " = " + fitness.to_string();
}

void FitnessCache::load_locked() {
  entries_.clear();
  const auto lines = split(read_file(path_), '\n');
  if (lines.empty() || !starts_with(lines[0], kHeader)) {
    throw CacheMismatchError(path_.string() + ": missing #traincfg header");
  }
  const auto stored = lines[0].substr(kHeader.size());
  if (stored != digest_) {
    throw CacheMismatchError(path_.string() + ": cache was built with train settings " + stored +
                             ", current settings are " + digest_);
  }
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    try {
      if (eq == std::string::npos) throw ParseError("expected '<id> = <fitness>'");
      Identifier id(line.substr(0, eq));
      entries_.emplace(std::move(id), Fitness::parse(line.substr(eq + 3)));
    } catch (const ParseError& e) {
      throw PersistError(path_.string() + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
}

void FitnessCache::reload() {
  std::lock_guard lock(mu_);
  load_locked();
}

std::optional<Fitness> FitnessCache::lookup(const Identifier& id) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool FitnessCache::insert(const Identifier& id, Fitness fitness) {
  std::lock_guard lock(mu_);
  if (entries_.count(id)) return false;
  append_line(path_, format_line(id, fitness));
  entries_.emplace(id, fitness);
  return true;
}

std::size_t FitnessCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace enasfarm
