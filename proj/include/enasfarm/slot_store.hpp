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
#include <string_view>
#include <vector>

#include "enasfarm/util.hpp"

namespace enasfarm {

/// Quarantined: occupied by something this run did not start.
/// Lost: the node stopped answering.
enum class SlotStatus { Idle, Busy, Quarantined, Lost };
std::string_view slot_status_name(SlotStatus status);

struct SlotKey {
  std::string node;
  int slot = 0;
  bool operator==(const SlotKey&) const = default;
};

struct SlotState {
  std::string node;
  int slot = 0;
  SlotStatus status = SlotStatus::Idle;
  std::string job;
  double last_poll = 0.0;
  bool operator==(const SlotState&) const = default;
};

/// One slot as seen by the worker: the job it runs, empty when idle.
struct SlotReport {
  int slot = 0;
  std::string job;
};

enum class Placement { Lowest, Random };

/// The slot table and its transitions, independent of storage.
class SlotTable {
 public:
  /// Registers `slots` slots for `node`; a known node is left unchanged.
  void add_node(const std::string& node, int slots);
  /// First Idle slot in (node registration, slot) order, or a uniform one
  /// under Placement::Random; marks it Busy with `job`.
  std::optional<SlotKey> acquire(const std::string& job, Placement placement = Placement::Lowest,
                                 Rng* rng = nullptr);
  /// Busy -> Idle. Quarantined and Lost slots keep their status.
  void release(const SlotKey& key);
  /// Folds a worker's report in. A slot running a job the table does not
  /// know becomes Quarantined; a reported-idle Quarantined or Lost slot
  /// becomes Idle; a Busy slot reported idle stays Busy (its job may not
  /// have started yet).
  void reconcile(const std::string& node, const std::vector<SlotReport>& report, double now);
  /// All slots of `node` become Lost; returns the jobs they were running.
  std::vector<std::string> mark_lost(const std::string& node);
  void quarantine(const SlotKey& key);

  const std::vector<SlotState>& slots() const { return slots_; }
  std::string serialize() const;
  static SlotTable parse(const std::string& text);

 private:
  SlotState* find(const SlotKey& key);
  std::vector<SlotState> slots_;
};

/// Serialized access to a SlotTable.
class SlotStore {
 public:
  virtual ~SlotStore() = default;
  virtual void add_node(const std::string& node, int slots) = 0;
  virtual std::optional<SlotKey> acquire(const std::string& job) = 0;
  virtual void release(const SlotKey& key) = 0;
  virtual void reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) = 0;
  virtual std::vector<std::string> mark_lost(const std::string& node) = 0;
  virtual void quarantine(const SlotKey& key) = 0;
  virtual std::vector<SlotState> snapshot() const = 0;
};

/// Mutex-guarded table, optionally mirrored to a state file after every
/// transition.
class InMemorySlotStore final : public SlotStore {
 public:
  explicit InMemorySlotStore(std::filesystem::path state_file = {}, Placement placement = Placement::Lowest,
                             std::uint64_t seed = 0);
  void add_node(const std::string& node, int slots) override;
  std::optional<SlotKey> acquire(const std::string& job) override;
  void release(const SlotKey& key) override;
  void reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) override;
  std::vector<std::string> mark_lost(const std::string& node) override;
  void quarantine(const SlotKey& key) override;
  std::vector<SlotState> snapshot() const override;

 private:
  void persist_locked() const;

  std::filesystem::path state_file_;
  Placement placement_;
  Rng rng_;
  mutable std::mutex mu_;
  SlotTable table_;
};

/// Table kept in a file shared by several processes; every transition holds
/// an exclusive flock on `<path>.lock`.
class FileSlotStore final : public SlotStore {
 public:
  explicit FileSlotStore(std::filesystem::path path);
  void add_node(const std::string& node, int slots) override;
  std::optional<SlotKey> acquire(const std::string& job) override;
  void release(const SlotKey& key) override;
  void reconcile(const std::string& node, const std::vector<SlotReport>& report, double now) override;
  std::vector<std::string> mark_lost(const std::string& node) override;
  void quarantine(const SlotKey& key) override;
  std::vector<SlotState> snapshot() const override;

 private:
  template <class F>
  auto locked(F&& f) const;

  std::filesystem::path path_;
  std::filesystem::path lock_path_;
  mutable std::mutex mu_;  // flock is per open file; threads also need this
};

}  // namespace enasfarm
