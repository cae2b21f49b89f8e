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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "enasfarm/cache.hpp"
#include "enasfarm/fitness.hpp"
#include "enasfarm/genotype.hpp"

namespace enasfarm {

// ------------------------------------------------------------------- records

/// A live job. Present on the bus exactly while the job runs.
struct ProcessRecord {
  std::string job;
  std::string node;
  int slot = -1;
  long pid = 0;
  double start = 0.0;
  bool operator==(const ProcessRecord&) const = default;
};

struct LogRecord {
  std::string job;
  std::string line;
  bool operator==(const LogRecord&) const = default;
};

struct FitnessRecord {
  std::string job;
  Identifier id;
  Fitness fitness;
  double duration_s = 0.0;
  bool operator==(const FitnessRecord&) const = default;
};

using RunRecord = std::variant<LogRecord, FitnessRecord>;

/// One-line JSON.
std::string encode_record(const RunRecord& record);
/// Throws ProtocolError.
RunRecord decode_record(const std::string& body);

/// An enqueued record and the id the bus assigned to it.
struct BusMessage {
  std::string rid;
  std::string body;
};

// ----------------------------------------------------------------------- bus

/// Many publishers, one consumer. Records stay on the bus until the consumer
/// removes them, so a consumer that dies mid-record sees it again.
class RecordBus {
 public:
  virtual ~RecordBus() = default;

  /// Enqueues `body` and returns its unique record id. Throws BusError.
  virtual std::string publish(const std::string& body) = 0;
  std::string publish(const RunRecord& record) { return publish(encode_record(record)); }

  /// Up to `max` records, oldest first, without consuming them.
  virtual std::vector<BusMessage> peek(std::size_t max) const = 0;
  virtual void remove(const std::string& rid) = 0;
  virtual std::size_t pending() const = 0;

  /// Process table, keyed by job name.
  virtual void put_process(const ProcessRecord& record) = 0;
  virtual void remove_process(const std::string& job) = 0;
  virtual std::vector<ProcessRecord> processes() const = 0;
};

/// Bounded in-memory queue. A publisher facing a full queue waits up to
/// `backpressure` for the consumer before failing with BusError.
class InProcessBus final : public RecordBus {
 public:
  explicit InProcessBus(std::size_t capacity = 1 << 16,
                        std::chrono::milliseconds backpressure = std::chrono::seconds(30));

  using RecordBus::publish;
  std::string publish(const std::string& body) override;
  std::vector<BusMessage> peek(std::size_t max) const override;
  void remove(const std::string& rid) override;
  std::size_t pending() const override;
  void put_process(const ProcessRecord& record) override;
  void remove_process(const std::string& job) override;
  std::vector<ProcessRecord> processes() const override;

 private:
  std::size_t capacity_;
  std::chrono::milliseconds backpressure_;
  mutable std::mutex mu_;
  std::condition_variable space_;
  std::deque<BusMessage> queue_;
  std::map<std::string, ProcessRecord> procs_;
  std::uint64_t next_ = 0;
};

/// Durable queue in a shared directory: one file per record under
/// records/, one per live process under procs/. When the directory cannot
/// be written, up to `spool_capacity` records wait in memory and are
/// flushed, in order, by the next successful publish or flush().
class FileBus final : public RecordBus {
 public:
  explicit FileBus(std::filesystem::path dir, std::size_t spool_capacity = 4096);

  using RecordBus::publish;
  std::string publish(const std::string& body) override;
  std::vector<BusMessage> peek(std::size_t max) const override;
  void remove(const std::string& rid) override;
  std::size_t pending() const override;
  void put_process(const ProcessRecord& record) override;
  void remove_process(const std::string& job) override;
  std::vector<ProcessRecord> processes() const override;

  /// Writes spooled records. Returns false while the directory is unusable.
  bool flush();
  std::size_t spooled() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  bool flush_locked();
  std::string next_rid_locked();

  std::filesystem::path dir_;
  std::size_t spool_capacity_;
  mutable std::mutex mu_;
  std::deque<BusMessage> spool_;
  std::uint64_t last_stamp_ = 0;
  std::uint64_t counter_ = 0;
};

// ------------------------------------------------------------------ listener

struct ListenerPaths {
  std::filesystem::path run_log;      // "[<job>] <line>"
  std::filesystem::path result;       // "<name>=<dd.dd>"
  std::filesystem::path dead_letter;  // "<rid>\t<body>"
  std::filesystem::path journal;      // write-ahead log of applied record ids

  /// run.log, result.txt, dead_letter.txt and listener.journal in `dir`.
  static ListenerPaths in(const std::filesystem::path& dir);
};

/// Thrown by a listener configured to die at a crash point (tests only).
struct ListenerCrash {};

/// The single consumer of a run's bus. Log records go to the run log,
/// fitness records to the cache (when given) and the result file, malformed
/// records to the dead-letter file; each record is deleted after it is
/// applied. A journal makes delivery exactly-once across listener restarts:
/// the file sizes are noted before a record is applied and restored if the
/// listener dies before marking it done.
class Listener {
 public:
  Listener(RecordBus& bus, FitnessCache* cache, ListenerPaths paths);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  /// Applies up to `limit` records. Returns the number consumed.
  std::size_t drain(std::size_t limit = SIZE_MAX);

  /// Background consumption; stop() drains whatever is left.
  void start(std::chrono::milliseconds period = std::chrono::milliseconds(5));
  void stop();

  struct Stats {
    std::size_t consumed = 0;
    std::size_t log_lines = 0;
    std::size_t fitness_records = 0;
    std::size_t cache_inserts = 0;
    std::size_t dead_letters = 0;
    std::size_t skipped_duplicates = 0;
  };
  Stats stats() const;

  enum class CrashPoint { None, AfterIntent, AfterEffects, AfterCommit };
  /// Throws ListenerCrash at `point` while handling the `nth` (0-based)
  /// record from now on.
  void inject_crash(CrashPoint point, std::size_t nth);

 private:
  void recover();
  void apply(const BusMessage& message);
  void maybe_crash(CrashPoint point);

  RecordBus& bus_;
  FitnessCache* cache_;
  ListenerPaths paths_;
  std::set<std::string> applied_;
  mutable std::mutex mu_;
  Stats stats_;
  CrashPoint crash_point_ = CrashPoint::None;
  std::size_t crash_countdown_ = 0;
  bool armed_ = false;

  std::thread worker_;
  std::atomic<bool> stop_{false};
};

// ------------------------------------------------------------------ kill_all

/// Sends a termination to a live process; false when its node is unreachable.
using TerminateFn = std::function<bool(const ProcessRecord&)>;
/// Called for processes whose node did not answer.
using QuarantineFn = std::function<void(const ProcessRecord&)>;

/// Terminates every live process on the bus, clears the process table and
/// drains the listener. Returns the number of termination commands sent.
std::size_t kill_all(RecordBus& bus, const TerminateFn& terminate, const QuarantineFn& quarantine,
                     Listener* listener);

}  // namespace enasfarm
