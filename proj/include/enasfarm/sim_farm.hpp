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
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "enasfarm/backend.hpp"
#include "enasfarm/executor.hpp"

namespace enasfarm {

struct SimWorkerSpec {
  std::string node;
  int slots = 1;
};

/// One line of a fault script:
///
///   at <time> crash <node>      node dies, its running jobs are requeued
///   at <time> recover <node>    node's slots become idle again
///   at <time> interrupt         the run is interrupted (kill_all)
///   fail <job> [<count>]        the next <count> attempts of <job> fail
///
/// '#' starts a comment.
struct FaultEvent {
  enum class Kind { Crash, Recover, Interrupt, Fail };
  Kind kind = Kind::Crash;
  double time = 0.0;
  std::string target;
  int count = 1;
  bool operator==(const FaultEvent&) const = default;
};

/// Throws ConfigError naming the offending line.
std::vector<FaultEvent> parse_fault_script(const std::string& text, const std::string& origin = "fault script");

struct SimFarmSpec {
  std::vector<SimWorkerSpec> workers{{"sim0", 4}};
  /// > 0: every attempt lasts this long (before jitter). 0: the backend's
  /// reported duration.
  double job_duration_s = 0.0;
  /// Relative jitter: duration * (1 + jitter * u), u uniform in [-1, 1).
  double jitter = 0.0;
  /// Virtual time between a slot being claimed and the job starting.
  double dispatch_overhead_s = 0.0;
  int retries = 2;
  std::vector<FaultEvent> faults;
  std::uint64_t seed = 0;
};

struct TraceEvent {
  double time = 0.0;
  std::string kind;  // dispatch, finish, fail, lost, kill
  std::string job;
  std::string node;
  int slot = -1;
  int attempt = 0;
  std::string to_string() const;
};

/// Deterministic farm in virtual time on the calling thread. Jobs go to the
/// lowest-index idle slot as soon as one exists; the fitness itself comes
/// from a real backend instance per slot.
class SimulatedFarm final : public JobExecutor {
 public:
  SimulatedFarm(SimFarmSpec spec, RecordBus& bus);

  std::vector<JobOutcome> execute(std::span<const JobSpec> jobs) override;
  FarmAccounting accounting() const override { return accounting_; }
  RecordBus& bus() override { return bus_; }

  double now() const { return now_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  std::string trace_text() const;
  bool interrupted() const { return interrupted_; }
  /// Pids of simulated trainer processes currently alive.
  const std::set<long>& live_processes() const { return live_; }
  std::vector<std::string> slot_statuses() const;

 private:
  struct Slot {
    std::size_t worker = 0;
    int index = 0;
    bool lost = false;
    bool busy = false;
    std::size_t job = 0;
    double claimed = 0.0;
    double start = 0.0;
    double end = 0.0;
    long pid = 0;
    bool fails = false;
    std::string error;
    JobResult result;
    std::vector<std::string> logs;
  };

  FitnessBackend& backend_for(std::size_t slot, const BackendConfig& cfg);
  void kill_process(Slot& slot);

  SimFarmSpec spec_;
  RecordBus& bus_;
  std::vector<Slot> slots_;
  std::vector<std::pair<BackendConfig, std::unique_ptr<FitnessBackend>>> backends_;
  std::map<std::string, int> fail_budget_;
  std::vector<FaultEvent> timed_;  // sorted by time
  std::size_t next_fault_ = 0;
  Rng rng_;
  double now_ = 0.0;
  long next_pid_ = 1000;
  std::set<long> live_;
  std::vector<TraceEvent> trace_;
  FarmAccounting accounting_;
  bool interrupted_ = false;
};

}  // namespace enasfarm
