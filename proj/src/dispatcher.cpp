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


#include "enasfarm/dispatcher.hpp"

#include <condition_variable>
#include <deque>
#include <thread>

#include "enasfarm/errors.hpp"

namespace enasfarm {

Dispatcher::Dispatcher(std::vector<std::unique_ptr<WorkerEndpoint>> workers, SlotStore& store, RecordBus& bus,
                       DispatcherOptions options)
    : workers_(std::move(workers)), store_(store), bus_(bus), options_(options),
      epoch_(std::chrono::steady_clock::now()) {
  if (workers_.empty()) throw ConfigError("dispatcher needs at least one worker");
  if (options_.retries < 0) throw ConfigError("retries must be non-negative");
  for (const auto& w : workers_) {
    store_.add_node(w->node(), w->slot_count());
    last_seen_[w->node()] = 0.0;
  }
}

Dispatcher::~Dispatcher() = default;

double Dispatcher::clock() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

WorkerEndpoint& Dispatcher::endpoint(const std::string& node) {
  for (auto& w : workers_) {
    if (w->node() == node) return *w;
  }
  throw InvariantViolation("no worker " + node);
}

FarmAccounting Dispatcher::accounting() const {
  std::lock_guard lock(mu_);
  return accounting_;
}

void Dispatcher::poll_workers() {
  for (auto& w : workers_) {
    const auto st = w->status();
    const double now = clock();
    if (st) {
      store_.reconcile(w->node(), st->slots, now);
      std::lock_guard lock(mu_);
      last_seen_[w->node()] = now;
      continue;
    }
    double seen;
    {
      std::lock_guard lock(mu_);
      seen = last_seen_[w->node()];
    }
    if (now - seen > options_.lost_timeout_s) {
      store_.mark_lost(w->node());
      w->abort_all();
    }
  }
}

JobResult Dispatcher::dispatch(const JobSpec& job, const SlotKey& slot) {
  ProcessRecord proc{job.name, slot.node, slot.slot, 0, clock()};
  bus_.put_process(proc);
  JobContext ctx{[&](const std::string& line) { bus_.publish(LogRecord{job.name, line}); },
                 [&](long pid) {
                   proc.pid = pid;
                   bus_.put_process(proc);
                 }};
  auto cleanup = [&] {
    bus_.remove_process(job.name);
    store_.release(slot);
  };
  try {
    const JobResult r = endpoint(slot.node).run(job, slot.slot, ctx);
    cleanup();
    bus_.publish(FitnessRecord{job.name, job.id, r.fitness, r.duration_s});
    return r;
  } catch (const WorkerLostError&) {
    // Mark the node before the slot is released so no retry lands on it.
    store_.mark_lost(slot.node);
    cleanup();
    throw;
  } catch (...) {
    cleanup();
    throw;
  }
}

std::vector<JobOutcome> Dispatcher::execute(std::span<const JobSpec> jobs) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<JobOutcome> outcomes(jobs.size());
  std::vector<int> attempts(jobs.size(), 0);
  std::deque<std::size_t> pending;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    outcomes[j].name = jobs[j].name;
    outcomes[j].id = jobs[j].id;
    pending.push_back(j);
  }
  {
    std::lock_guard lock(mu_);
    accounting_.jobs += static_cast<std::int64_t>(jobs.size());
  }

  std::mutex m;
  std::condition_variable cv;
  std::size_t remaining = jobs.size();
  std::size_t inflight = 0;
  std::vector<std::thread> threads;

  std::atomic<bool> stop_poller{false};
  std::thread poller([&] {
    while (!stop_poller) {
      poll_workers();
      cv.notify_all();
      const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(options_.poll_interval_s);
      while (!stop_poller && std::chrono::steady_clock::now() < until) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
    }
  });

  auto run_attempt = [&](std::size_t j, SlotKey key) {
    std::optional<JobResult> result;
    std::string error;
    try {
      result = dispatch(jobs[j], key);
    } catch (const WorkerLostError& e) {
      error = std::string("WorkerLostError: ") + e.what();
    } catch (const Error& e) {
      error = std::string("JobFailed: ") + e.what();
    }
    if (!result) bus_.publish(LogRecord{jobs[j].name, "attempt " + std::to_string(attempts[j]) + " failed: " + error});
    std::lock_guard lock(m);
    --inflight;
    if (result) {
      outcomes[j].result = result;
      outcomes[j].attempts = attempts[j];
      --remaining;
      std::lock_guard acc(mu_);
      accounting_.busy_seconds += result->duration_s;
    } else if (attempts[j] <= options_.retries) {
      pending.push_back(j);
    } else {
      outcomes[j].error = error + " (after " + std::to_string(attempts[j]) + " attempts)";
      outcomes[j].attempts = attempts[j];
      --remaining;
      std::lock_guard acc(mu_);
      ++accounting_.failed;
    }
    cv.notify_all();
  };

  {
    std::unique_lock lock(m);
    auto starved_since = std::chrono::steady_clock::now();
    while (remaining > 0) {
      bool progressed = false;
      while (!pending.empty()) {
        const auto key = store_.acquire(jobs[pending.front()].name);
        if (!key) break;
        const auto j = pending.front();
        pending.pop_front();
        ++attempts[j];
        ++inflight;
        {
          std::lock_guard acc(mu_);
          ++accounting_.attempts;
        }
        threads.emplace_back(run_attempt, j, *key);
        progressed = true;
      }
      if (progressed || inflight > 0 || pending.empty()) starved_since = std::chrono::steady_clock::now();
      const double starved = std::chrono::duration<double>(std::chrono::steady_clock::now() - starved_since).count();
      if (starved > options_.lost_timeout_s + 2 * options_.poll_interval_s) {
        // Nothing runs and no slot has come back: give up on the rest.
        while (!pending.empty()) {
          const auto j = pending.front();
          pending.pop_front();
          outcomes[j].error = "WorkerLostError: no usable worker slot";
          outcomes[j].attempts = attempts[j];
          --remaining;
          std::lock_guard acc(mu_);
          ++accounting_.failed;
        }
        break;
      }
      cv.wait_for(lock, std::chrono::milliseconds(50));
    }
  }
  for (auto& t : threads) t.join();
  stop_poller = true;
  poller.join();
  std::lock_guard acc(mu_);
  accounting_.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return outcomes;
}

std::size_t Dispatcher::kill_all(Listener* listener) {
  return enasfarm::kill_all(
      bus_, [&](const ProcessRecord& p) { return endpoint(p.node).kill(p.pid); },
      [&](const ProcessRecord& p) { store_.quarantine({p.node, p.slot}); }, listener);
}

}  // namespace enasfarm
