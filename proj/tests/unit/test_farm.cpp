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


#include <gtest/gtest.h>
#include <signal.h>

#include <chrono>
#include <set>
#include <thread>

#include "enasfarm/backend.hpp"
#include "enasfarm/dispatcher.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/sim_farm.hpp"
#include "enasfarm/worker.hpp"
#include "jobs.hpp"
#include "temp_dir.hpp"

namespace enasfarm {
namespace {

using namespace std::chrono_literals;
using testing::sample_jobs;

SimFarmSpec farm(int slots, double duration = 1.0, double overhead = 0.0) {
  SimFarmSpec s;
  s.workers = {{"sim0", slots}};
  s.job_duration_s = duration;
  s.dispatch_overhead_s = overhead;
  return s;
}

// ------------------------------------------------------------ fault script

TEST(FaultScript, Parses) {
  const auto ev = parse_fault_script("# demo\nat 1.5 crash sim0\nat 4 recover sim0  # back\n\nat 9 interrupt\nfail j3 2\nfail j4\n");
  ASSERT_EQ(ev.size(), 5u);
  EXPECT_EQ(ev[0], (FaultEvent{FaultEvent::Kind::Crash, 1.5, "sim0", 1}));
  EXPECT_EQ(ev[1], (FaultEvent{FaultEvent::Kind::Recover, 4.0, "sim0", 1}));
  EXPECT_EQ(ev[2], (FaultEvent{FaultEvent::Kind::Interrupt, 9.0, "", 1}));
  EXPECT_EQ(ev[3], (FaultEvent{FaultEvent::Kind::Fail, 0.0, "j3", 2}));
  EXPECT_EQ(ev[4], (FaultEvent{FaultEvent::Kind::Fail, 0.0, "j4", 1}));
}

TEST(FaultScript, RejectsWithLineNumber) {
  for (const char* bad : {"at x crash a", "at 1 explode a", "at 1 interrupt now", "fail", "fail j 0", "crash a"}) {
    try {
      parse_fault_script(std::string("\n") + bad, "f.txt");
      FAIL() << bad;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("f.txt:2"), std::string::npos) << e.what();
    }
  }
  InProcessBus bus;
  auto s = farm(2);
  s.faults = parse_fault_script("at 1 crash nobody");
  EXPECT_THROW(SimulatedFarm(s, bus), ConfigError);
}

// --------------------------------------------------------------- makespan

TEST(SimulatedFarm, MakespanTenJobsFourSlots) {
  InProcessBus bus;
  SimulatedFarm f(farm(4), bus);
  const auto jobs = sample_jobs(10);
  const auto out = f.execute(jobs);
  EXPECT_DOUBLE_EQ(f.now(), 3.0);
  for (const auto& o : out) ASSERT_TRUE(o.result) << o.error;
  EXPECT_DOUBLE_EQ(f.accounting().busy_seconds, 10.0);
  EXPECT_EQ(f.accounting().attempts, 10);
}

TEST(SimulatedFarm, MakespanEightJobs) {
  InProcessBus bus;
  SimulatedFarm f(farm(4), bus);
  f.execute(sample_jobs(8));
  EXPECT_DOUBLE_EQ(f.now(), 2.0);
}

TEST(SimulatedFarm, MakespanWithDispatchOverhead) {
  for (const int n : {8, 10}) {
    InProcessBus bus;
    SimulatedFarm f(farm(4, 1.0, 0.02), bus);
    f.execute(sample_jobs(n));
    const double ideal = n == 8 ? 2.0 : 3.0;
    EXPECT_LE(std::abs(f.now() - ideal) / ideal, 0.05) << f.now();
  }
}

// Every dispatch happens at time 0 or at the instant another job finished.
TEST(SimulatedFarm, PlacesJobsImmediately) {
  InProcessBus bus;
  auto spec = farm(3, 1.0);
  spec.jitter = 0.5;
  spec.seed = 4;
  SimulatedFarm f(spec, bus);
  f.execute(sample_jobs(17));
  std::set<double> frees{0.0};
  for (const auto& e : f.trace()) {
    if (e.kind == "finish") frees.insert(e.time);
  }
  int dispatches = 0;
  for (const auto& e : f.trace()) {
    if (e.kind != "dispatch") continue;
    ++dispatches;
    EXPECT_TRUE(frees.count(e.time)) << e.to_string();
  }
  EXPECT_EQ(dispatches, 17);
}

TEST(SimulatedFarm, FitnessComesFromBackendAndBus) {
  InProcessBus bus;
  SimulatedFarm f(farm(2, 0.0), bus);
  const auto jobs = sample_jobs(5);
  const auto out = f.execute(jobs);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ASSERT_TRUE(out[i].result);
    EXPECT_EQ(out[i].result->fitness, surrogate_fitness(jobs[i]).fitness);
    EXPECT_DOUBLE_EQ(out[i].result->duration_s, surrogate_fitness(jobs[i]).duration_s);
  }
  int fitness = 0;
  for (const auto& m : bus.peek(1000)) {
    if (std::holds_alternative<FitnessRecord>(decode_record(m.body))) ++fitness;
  }
  EXPECT_EQ(fitness, 5);
  EXPECT_TRUE(bus.processes().empty());
}

// ------------------------------------------------------------------ faults

TEST(SimulatedFarm, CrashRequeuesAndLeavesNoOrphans) {
  InProcessBus bus;
  SimFarmSpec spec;
  spec.workers = {{"sim0", 2}, {"sim1", 2}};
  spec.job_duration_s = 1.0;
  spec.faults = parse_fault_script("at 0.5 crash sim0\nat 2.5 recover sim0\n");
  SimulatedFarm f(spec, bus);
  const auto out = f.execute(sample_jobs(8));
  for (const auto& o : out) EXPECT_TRUE(o.result) << o.name << " " << o.error;
  EXPECT_EQ(f.accounting().attempts, 10);
  EXPECT_EQ(out[0].attempts, 2);
  EXPECT_TRUE(f.live_processes().empty());
  EXPECT_TRUE(bus.processes().empty());
  int lost = 0;
  for (const auto& e : f.trace()) lost += e.kind == "lost";
  EXPECT_EQ(lost, 2);
  // 0.5 s of wasted work on each crashed slot
  EXPECT_DOUBLE_EQ(f.accounting().busy_seconds, 9.0);
}

TEST(SimulatedFarm, AllWorkersGone) {
  InProcessBus bus;
  auto spec = farm(2);
  spec.retries = 5;
  spec.faults = parse_fault_script("at 0.5 crash sim0\n");
  SimulatedFarm f(spec, bus);
  const auto out = f.execute(sample_jobs(3));
  for (const auto& o : out) {
    EXPECT_FALSE(o.result);
    EXPECT_NE(o.error.find("WorkerLostError"), std::string::npos) << o.error;
  }
}

TEST(SimulatedFarm, InterruptKillsEverything) {
  InProcessBus bus;
  auto spec = farm(4);
  spec.faults = parse_fault_script("at 1.5 interrupt\n");
  SimulatedFarm f(spec, bus);
  const auto out = f.execute(sample_jobs(10));
  int finished = 0, interrupted = 0;
  for (const auto& o : out) {
    finished += o.result.has_value();
    interrupted += o.interrupted;
  }
  EXPECT_EQ(finished, 4);
  EXPECT_EQ(interrupted, 6);
  EXPECT_TRUE(f.interrupted());
  EXPECT_TRUE(f.live_processes().empty());
  EXPECT_TRUE(bus.processes().empty());
  int kills = 0;
  for (const auto& e : f.trace()) kills += e.kind == "kill";
  EXPECT_EQ(kills, 4);
  for (const auto& s : f.slot_statuses()) EXPECT_NE(s.find("idle"), std::string::npos) << s;
  EXPECT_THROW(f.execute(sample_jobs(1)), InterruptedError);
}

TEST(SimulatedFarm, RetriesScriptedFailures) {
  InProcessBus bus;
  auto spec = farm(2);
  spec.retries = 2;
  spec.faults = parse_fault_script("fail j0 2\nfail j1 3\n");
  SimulatedFarm f(spec, bus);
  const auto out = f.execute(sample_jobs(3));
  ASSERT_TRUE(out[0].result);
  EXPECT_EQ(out[0].attempts, 3);
  EXPECT_FALSE(out[1].result);
  EXPECT_EQ(out[1].attempts, 3);
  EXPECT_NE(out[1].error.find("JobFailed"), std::string::npos);
  EXPECT_TRUE(out[2].result);
  EXPECT_EQ(f.accounting().failed, 1);
  EXPECT_EQ(f.accounting().attempts, 7);
}

// -------------------------------------------------------------- dispatcher

DispatcherOptions fast() {
  DispatcherOptions o;
  o.retries = 1;
  o.poll_interval_s = 0.05;
  o.lost_timeout_s = 0.5;
  return o;
}

TEST(Dispatcher, LocalWorkersMatchSurrogate) {
  InProcessBus bus;
  InMemorySlotStore store;
  std::vector<std::unique_ptr<WorkerEndpoint>> ws;
  ws.push_back(std::make_unique<LocalWorker>("local0", 2));
  ws.push_back(std::make_unique<LocalWorker>("local1", 2));
  Dispatcher d(std::move(ws), store, bus, fast());
  EXPECT_EQ(store.snapshot().size(), 4u);
  const auto jobs = sample_jobs(9);
  const auto out = d.execute(jobs);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ASSERT_TRUE(out[i].result) << out[i].error;
    EXPECT_EQ(out[i].result->fitness, surrogate_fitness(jobs[i]).fitness);
  }
  for (const auto& s : store.snapshot()) EXPECT_EQ(s.status, SlotStatus::Idle);
  EXPECT_TRUE(bus.processes().empty());
  EXPECT_EQ(d.accounting().jobs, 9);
}

TEST(Dispatcher, WorkerRefusesForeignBackend) {
  InProcessBus bus;
  InMemorySlotStore store;
  std::vector<std::unique_ptr<WorkerEndpoint>> ws;
  ws.push_back(std::make_unique<LocalWorker>("local0", 1, WorkerBackendOptions{"lookup", "", ""}));
  Dispatcher d(std::move(ws), store, bus, fast());
  const auto out = d.execute(sample_jobs(1));
  EXPECT_FALSE(out[0].result);
  EXPECT_EQ(out[0].attempts, 2);
  EXPECT_NE(out[0].error.find("JobFailed"), std::string::npos);
}

TEST(Dispatcher, RemoteWorkerOverLoopback) {
  WorkerServer server("127.0.0.1", 0, 3, {});
  server.start();
  InProcessBus bus;
  InMemorySlotStore store;
  std::vector<std::unique_ptr<WorkerEndpoint>> ws;
  ws.push_back(std::make_unique<RemoteWorker>(server.address()));
  EXPECT_EQ(ws[0]->slot_count(), 3);
  Dispatcher d(std::move(ws), store, bus, fast());
  const auto jobs = sample_jobs(7);
  const auto out = d.execute(jobs);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ASSERT_TRUE(out[i].result) << out[i].error;
    EXPECT_EQ(out[i].result->fitness, surrogate_fitness(jobs[i]).fitness);
  }
  server.stop();
}

TEST(Dispatcher, UnreachableAgent) { EXPECT_THROW(RemoteWorker("127.0.0.1:1", 0.5), WorkerLostError); }

class SlowCommand : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file_atomic(dir / "slow.sh", "echo started\nsleep 30\necho FITNESS=50.00\n");
    train.backend.kind = "command";
    train.backend.command = "sh " + (dir / "slow.sh").string();
  }
  testing::TempDir dir{"slow"};
  TrainConfig train;
};

TEST_F(SlowCommand, LostWorkerJobMovesElsewhere) {
  WorkerServer server("127.0.0.1", 0, 1, {});
  server.start();
  InProcessBus bus;
  InMemorySlotStore store;
  std::vector<std::unique_ptr<WorkerEndpoint>> ws;
  // the backup serves the job quickly with its own command
  write_file_atomic(dir / "quick.sh", "echo FITNESS=61.00\n");
  ws.push_back(std::make_unique<LocalWorker>("backup", 1, WorkerBackendOptions{"", "sh " + (dir / "quick.sh").string(), ""}));
  ws.push_back(std::make_unique<RemoteWorker>(server.address()));
  Dispatcher d(std::move(ws), store, bus, fast());
  // hold the backup slot so the first attempt lands on the remote node
  const auto held = store.acquire("placeholder");
  ASSERT_EQ(held->node, "backup");
  std::thread killer([&] {
    while (bus.processes().empty() || bus.processes()[0].pid == 0) std::this_thread::sleep_for(10ms);
    server.stop();
    store.release(*held);
  });
  const auto start = std::chrono::steady_clock::now();
  const auto out = d.execute(std::vector<JobSpec>{sample_jobs(1, train)[0]});
  killer.join();
  ASSERT_TRUE(out[0].result) << out[0].error;
  EXPECT_EQ(out[0].result->fitness.to_string(), "61.00");
  EXPECT_EQ(out[0].attempts, 2);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 20s);
  const auto snap = store.snapshot();
  EXPECT_EQ(snap[1].status, SlotStatus::Lost);
}

TEST_F(SlowCommand, KillAllTerminatesTrainers) {
  InProcessBus bus;
  InMemorySlotStore store;
  std::vector<std::unique_ptr<WorkerEndpoint>> ws;
  ws.push_back(std::make_unique<LocalWorker>("local0", 2));
  auto o = fast();
  o.retries = 0;
  Dispatcher d(std::move(ws), store, bus, o);
  std::vector<long> pids;
  std::size_t sent = 0;
  std::thread killer([&] {
    while (true) {
      const auto procs = bus.processes();
      if (procs.size() == 2 && procs[0].pid > 0 && procs[1].pid > 0) {
        for (const auto& p : procs) pids.push_back(p.pid);
        break;
      }
      std::this_thread::sleep_for(10ms);
    }
    sent = d.kill_all(nullptr);
  });
  const auto start = std::chrono::steady_clock::now();
  const auto out = d.execute(sample_jobs(2, train));
  killer.join();
  EXPECT_LT(std::chrono::steady_clock::now() - start, 20s);
  EXPECT_EQ(sent, 2u);
  for (const auto& r : out) EXPECT_FALSE(r.result);
  for (const long pid : pids) EXPECT_NE(::kill(static_cast<pid_t>(pid), 0), 0) << pid;
  EXPECT_TRUE(bus.processes().empty());
  for (const auto& s : store.snapshot()) EXPECT_EQ(s.status, SlotStatus::Idle);
}

}  // namespace
}  // namespace enasfarm
