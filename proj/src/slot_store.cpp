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


#include "enasfarm/slot_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <sstream>

#include "enasfarm/errors.hpp"

namespace enasfarm {

std::string_view slot_status_name(SlotStatus status) {
  switch (status) {
    case SlotStatus::Idle: return "idle";
    case SlotStatus::Busy: return "busy";
    case SlotStatus::Quarantined: return "quarantined";
    case SlotStatus::Lost: return "lost";
  }
  return "?";
}

namespace {

SlotStatus status_from_name(std::string_view name) {
  for (auto s : {SlotStatus::Idle, SlotStatus::Busy, SlotStatus::Quarantined, SlotStatus::Lost}) {
    if (slot_status_name(s) == name) return s;
  }
  throw PersistError("unknown slot status '" + std::string(name) + "'");
}

}  // namespace

// ----------------------------------------------------------------- SlotTable

SlotState* SlotTable::find(const SlotKey& key) {
  for (auto& s : slots_) {
    if (s.node == key.node && s.slot == key.slot) return &s;
  }
  return nullptr;
}

void SlotTable::add_node(const std::string& node, int slots) {
  if (slots < 1) throw ConfigError("worker " + node + " needs at least one slot");
  if (node.empty() || node.find_first_of(" \t\n") != std::string::npos) {
    throw ConfigError("invalid node address '" + node + "'");
  }
  if (std::any_of(slots_.begin(), slots_.end(), [&](const SlotState& s) { return s.node == node; })) return;
  for (int i = 0; i < slots; ++i) slots_.push_back({node, i, SlotStatus::Idle, "", 0.0});
}

std::optional<SlotKey> SlotTable::acquire(const std::string& job, Placement placement, Rng* rng) {
  std::vector<std::size_t> idle;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].status == SlotStatus::Idle) idle.push_back(i);
  }
  if (idle.empty()) return std::nullopt;
  std::size_t pick = idle.front();
  if (placement == Placement::Random && rng != nullptr) {
    pick = idle[std::uniform_int_distribution<std::size_t>(0, idle.size() - 1)(*rng)];
  }
  auto& s = slots_[pick];
  s.status = SlotStatus::Busy;
  s.job = job;
  return SlotKey{s.node, s.slot};
}

void SlotTable::release(const SlotKey& key) {
  auto* s = find(key);
  if (s == nullptr) throw InvariantViolation("release of unknown slot " + key.node + ":" + std::to_string(key.slot));
  if (s->status == SlotStatus::Busy) {
    s->status = SlotStatus::Idle;
    s->job.clear();
  }
}

void SlotTable::reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) {
  for (auto& s : slots_) {
    if (s.node != node) continue;
    s.last_poll = now;
    const auto it = std::find_if(report.begin(), report.end(), [&](const SlotReport& r) { return r.slot == s.slot; });
    const std::string running = it == report.end() ? "" : it->job;
    if (running.empty()) {
      if (s.status == SlotStatus::Quarantined || s.status == SlotStatus::Lost) {
        s.status = SlotStatus::Idle;
        s.job.clear();
      }
    } else if (!(s.status == SlotStatus::Busy && s.job == running)) {
      s.status = SlotStatus::Quarantined;
      s.job = running;
    }
  }
}

std::vector<std::string> SlotTable::mark_lost(const std::string& node) {
  std::vector<std::string> jobs;
  for (auto& s : slots_) {
    if (s.node != node) continue;
    if (s.status == SlotStatus::Busy) jobs.push_back(s.job);
    s.status = SlotStatus::Lost;
    s.job.clear();
  }
  return jobs;
}

void SlotTable::quarantine(const SlotKey& key) {
  if (auto* s = find(key)) s->status = SlotStatus::Quarantined;
}

std::string SlotTable::serialize() const {
  std::ostringstream os;
  for (const auto& s : slots_) {
    os << s.node << ' ' << s.slot << ' ' << slot_status_name(s.status) << ' ' << (s.job.empty() ? "-" : s.job) << ' '
       << format_fixed(s.last_poll, 3) << '\n';
  }
  return os.str();
}

SlotTable SlotTable::parse(const std::string& text) {
  SlotTable t;
  for (const auto& line : split(text, '\n')) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ' ');
    if (f.size() != 5) throw PersistError("malformed slot line '" + line + "'");
    const auto slot = parse_int(f[1]);
    const auto poll = parse_double(f[4]);
    if (!slot || !poll) throw PersistError("malformed slot line '" + line + "'");
    t.slots_.push_back({f[0], static_cast<int>(*slot), status_from_name(f[2]), f[3] == "-" ? "" : f[3], *poll});
  }
  return t;
}

// --------------------------------------------------------- InMemorySlotStore

InMemorySlotStore::InMemorySlotStore(std::filesystem::path state_file, Placement placement, std::uint64_t seed)
    : state_file_(std::move(state_file)), placement_(placement), rng_(seed) {}

void InMemorySlotStore::persist_locked() const {
  if (!state_file_.empty()) write_file_atomic(state_file_, table_.serialize());
}

void InMemorySlotStore::add_node(const std::string& node, int slots) {
  std::lock_guard lock(mu_);
  table_.add_node(node, slots);
  persist_locked();
}

std::optional<SlotKey> InMemorySlotStore::acquire(const std::string& job) {
  std::lock_guard lock(mu_);
  auto key = table_.acquire(job, placement_, &rng_);
  if (key) persist_locked();
  return key;
}

void InMemorySlotStore::release(const SlotKey& key) {
  std::lock_guard lock(mu_);
  table_.release(key);
  persist_locked();
}

void InMemorySlotStore::reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) {
  std::lock_guard lock(mu_);
  table_.reconcile(node, report, now);
  persist_locked();
}

std::vector<std::string> InMemorySlotStore::mark_lost(const std::string& node) {
  std::lock_guard lock(mu_);
  auto jobs = table_.mark_lost(node);
  persist_locked();
  return jobs;
}

void InMemorySlotStore::quarantine(const SlotKey& key) {
  std::lock_guard lock(mu_);
  table_.quarantine(key);
  persist_locked();
}

std::vector<SlotState> InMemorySlotStore::snapshot() const {
  std::lock_guard lock(mu_);
  return table_.slots();
}

// ------------------------------------------------------------- FileSlotStore

FileSlotStore::FileSlotStore(std::filesystem::path path) : path_(std::move(path)) {
  lock_path_ = path_;
  lock_path_ += ".lock";
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

template <class F>
auto FileSlotStore::locked(F&& f) const {
  std::lock_guard guard(mu_);
  const int fd = ::open(lock_path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw PersistError("cannot open " + lock_path_.string());
  struct Unlock {
    int fd;
    ~Unlock() {
      ::flock(fd, LOCK_UN);
      ::close(fd);
    }
  } unlock{fd};
  while (::flock(fd, LOCK_EX) != 0) {
    if (errno != EINTR) throw PersistError("cannot lock " + lock_path_.string());
  }
  SlotTable table = std::filesystem::exists(path_) ? SlotTable::parse(read_file(path_)) : SlotTable{};
  const std::string before = table.serialize();
  auto result = f(table);
  if (table.serialize() != before) write_file_atomic(path_, table.serialize());
  return result;
}

void FileSlotStore::add_node(const std::string& node, int slots) {
  locked([&](SlotTable& t) {
    t.add_node(node, slots);
    return 0;
  });
}

std::optional<SlotKey> FileSlotStore::acquire(const std::string& job) {
  return locked([&](SlotTable& t) { return t.acquire(job); });
}

void FileSlotStore::release(const SlotKey& key) {
  locked([&](SlotTable& t) {
    t.release(key);
    return 0;
  });
}

void FileSlotStore::reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) {
  locked([&](SlotTable& t) {
    t.reconcile(node, report, now);
    return 0;
  });
}

std::vector<std::string> FileSlotStore::mark_lost(const std::string& node) {
  return locked([&](SlotTable& t) { return t.mark_lost(node); });
}

void FileSlotStore::quarantine(const SlotKey& key) {
  locked([&](SlotTable& t) {
    t.quarantine(key);
    return 0;
  });
}

std::vector<SlotState> FileSlotStore::snapshot() const {
  return locked([&](SlotTable& t) { return t.slots(); });
}

}  // namespace enasfarm
