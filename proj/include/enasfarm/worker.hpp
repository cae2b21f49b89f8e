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
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "enasfarm/backend.hpp"
#include "enasfarm/slot_store.hpp"

namespace enasfarm {

/// What a worker runs. An empty kind accepts whatever backend the job asks
/// for; a non-empty one rejects other kinds. command/table override the
/// job's values when set.
struct WorkerBackendOptions {
  std::string kind;
  std::string command;
  std::string table;
  bool operator==(const WorkerBackendOptions&) const = default;
};

struct WorkerStatus {
  std::string node;
  std::string backend;
  std::vector<SlotReport> slots;
  std::vector<long> pids;
};

/// The slots of one worker and the backends bound to them.
class SlotRunner {
 public:
  SlotRunner(int slots, WorkerBackendOptions options);

  int slots() const { return static_cast<int>(running_.size()); }
  /// Throws JobFailed when the slot is taken or the kind is not served.
  JobResult run(const JobSpec& job, int slot, const JobContext& ctx);
  std::vector<SlotReport> report() const;
  std::vector<long> pids() const;
  /// SIGTERM to the process group of `pid` if this runner started it.
  bool kill(long pid);
  const WorkerBackendOptions& options() const { return options_; }

 private:
  BackendConfig resolve(const BackendConfig& requested) const;

  WorkerBackendOptions options_;
  mutable std::mutex mu_;
  std::vector<std::string> running_;
  std::vector<long> pid_;
  std::vector<std::pair<BackendConfig, std::unique_ptr<FitnessBackend>>> backends_;
};

/// One compute node as seen by the dispatcher.
class WorkerEndpoint {
 public:
  virtual ~WorkerEndpoint() = default;
  virtual const std::string& node() const = 0;
  virtual int slot_count() const = 0;
  /// Throws JobFailed for trainer errors and WorkerLostError when the node
  /// cannot be reached.
  virtual JobResult run(const JobSpec& job, int slot, const JobContext& ctx) = 0;
  /// nullopt when unreachable.
  virtual std::optional<WorkerStatus> status() = 0;
  virtual bool kill(long pid) = 0;
  /// Breaks every in-flight call (the node was declared lost).
  virtual void abort_all() {}
};

/// In-process worker: jobs run on the dispatcher's own threads.
class LocalWorker final : public WorkerEndpoint {
 public:
  LocalWorker(std::string node, int slots, WorkerBackendOptions options = {});
  const std::string& node() const override { return node_; }
  int slot_count() const override { return runner_.slots(); }
  JobResult run(const JobSpec& job, int slot, const JobContext& ctx) override;
  std::optional<WorkerStatus> status() override;
  bool kill(long pid) override { return runner_.kill(pid); }

 private:
  std::string node_;
  SlotRunner runner_;
};

/// Worker agent reached over TCP.
class RemoteWorker final : public WorkerEndpoint {
 public:
  /// Queries the agent once for its slot count. Throws WorkerLostError.
  explicit RemoteWorker(std::string address, double connect_timeout_s = 5.0);
  const std::string& node() const override { return address_; }
  int slot_count() const override { return slots_; }
  JobResult run(const JobSpec& job, int slot, const JobContext& ctx) override;
  std::optional<WorkerStatus> status() override;
  bool kill(long pid) override;
  void abort_all() override;

 private:
  std::string address_;
  std::string host_;
  int port_ = 0;
  double timeout_s_;
  int slots_ = 0;
  std::mutex mu_;
  std::set<int> active_;
};

/// The `worker` agent: serves job, status and kill requests, one request
/// per connection.
class WorkerServer {
 public:
  WorkerServer(std::string host, int port, int slots, WorkerBackendOptions options);
  ~WorkerServer();
  WorkerServer(const WorkerServer&) = delete;
  WorkerServer& operator=(const WorkerServer&) = delete;

  /// Binds and starts accepting. Throws ConfigError.
  void start();
  int port() const { return port_; }
  std::string address() const { return host_ + ":" + std::to_string(port_); }
  /// Kills running trainers and joins every thread.
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

 private:
  void accept_loop();
  void handle(int fd);

  std::string host_;
  int port_;
  SlotRunner runner_;
  int listen_fd_ = -1;
  std::atomic<bool> stop_{false};
  std::thread acceptor_;
  std::mutex mu_;
  struct Handler {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::vector<Handler> handlers_;
};

}  // namespace enasfarm
