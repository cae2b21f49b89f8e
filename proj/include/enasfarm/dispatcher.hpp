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
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "enasfarm/executor.hpp"
#include "enasfarm/slot_store.hpp"
#include "enasfarm/worker.hpp"

namespace enasfarm {

struct DispatcherOptions {
  int retries = 2;
  double poll_interval_s = 2.0;
  /// A node silent for this long is declared lost.
  double lost_timeout_s = 10.0;
};

/// Real-time executor. One thread per in-flight job claims a slot from the
/// store, runs the job on the slot's worker and releases the slot; a poller
/// reconciles the store with what the workers report.
class Dispatcher final : public JobExecutor {
 public:
  /// Registers every endpoint's slots with `store`.
  Dispatcher(std::vector<std::unique_ptr<WorkerEndpoint>> workers, SlotStore& store, RecordBus& bus,
             DispatcherOptions options = {});
  ~Dispatcher() override;

  std::vector<JobOutcome> execute(std::span<const JobSpec> jobs) override;
  FarmAccounting accounting() const override;
  RecordBus& bus() override { return bus_; }

  /// One polling round over all workers.
  void poll_workers();
  /// Runs one job on a slot the caller already holds; the slot is released
  /// whatever happens. Throws JobFailed / WorkerLostError.
  JobResult dispatch(const JobSpec& job, const SlotKey& slot);
  /// Terminates every live process of this run (see kill_all).
  std::size_t kill_all(Listener* listener);

  SlotStore& store() { return store_; }

 private:
  WorkerEndpoint& endpoint(const std::string& node);
  double clock() const;

  std::vector<std::unique_ptr<WorkerEndpoint>> workers_;
  SlotStore& store_;
  RecordBus& bus_;
  DispatcherOptions options_;
  std::chrono::steady_clock::time_point epoch_;
  mutable std::mutex mu_;
  std::map<std::string, double> last_seen_;
  FarmAccounting accounting_;
};

}  // namespace enasfarm
