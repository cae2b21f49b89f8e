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


#include "enasfarm/sim_farm.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

std::vector<FaultEvent> parse_fault_script(const std::string& text, const std::string& origin) {
  std::vector<FaultEvent> events;
  const auto lines = split(text, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string> words;
    for (const auto& w : split(trim(line), ' ')) {
      if (!trim(w).empty()) words.emplace_back(trim(w));
    }
    if (words.empty()) continue;
    const auto where = origin + ":" + std::to_string(n + 1);
    FaultEvent e;
    if (words[0] == "at") {
      const auto t = words.size() >= 3 ? parse_double(words[1]) : std::nullopt;
      if (!t || *t < 0) throw ConfigError(where + ": expected 'at <time> <action> ...'");
      e.time = *t;
      if (words[2] == "crash" && words.size() == 4) {
        e.kind = FaultEvent::Kind::Crash;
        e.target = words[3];
      } else if (words[2] == "recover" && words.size() == 4) {
        e.kind = FaultEvent::Kind::Recover;
        e.target = words[3];
      } else if (words[2] == "interrupt" && words.size() == 3) {
        e.kind = FaultEvent::Kind::Interrupt;
      } else {
        throw ConfigError(where + ": unknown action '" + words[2] + "' or wrong arity");
      }
    } else if (words[0] == "fail" && (words.size() == 2 || words.size() == 3)) {
      e.kind = FaultEvent::Kind::Fail;
      e.target = words[1];
      if (words.size() == 3) {
        const auto c = parse_int(words[2]);
        if (!c || *c < 1) throw ConfigError(where + ": fail count must be a positive integer");
        e.count = static_cast<int>(*c);
      }
    } else {
      throw ConfigError(where + ": cannot parse '" + std::string(trim(line)) + "'");
    }
    events.push_back(e);
  }
  return events;
}

std::string TraceEvent::to_string() const {
  return format_fixed(time, 6) + " " + kind + " " + job + " " + node + ":" + std::to_string(slot) + " #" +
         std::to_string(attempt);
}

SimulatedFarm::SimulatedFarm(SimFarmSpec spec, RecordBus& bus) : spec_(std::move(spec)), bus_(bus), rng_(spec_.seed) {
  if (spec_.workers.empty()) throw ConfigError("simulated farm needs at least one worker");
  if (spec_.retries < 0) throw ConfigError("retries must be non-negative");
  if (spec_.job_duration_s < 0 || spec_.dispatch_overhead_s < 0 || spec_.jitter < 0 || spec_.jitter >= 1) {
    throw ConfigError("simulated farm durations must be non-negative and jitter in [0, 1)");
  }
  std::set<std::string> nodes;
  for (std::size_t w = 0; w < spec_.workers.size(); ++w) {
    const auto& worker = spec_.workers[w];
    if (worker.slots < 1) throw ConfigError("worker " + worker.node + " needs at least one slot");
    if (!nodes.insert(worker.node).second) throw ConfigError("duplicate worker " + worker.node);
    for (int i = 0; i < worker.slots; ++i) {
      Slot s;
      s.worker = w;
      s.index = i;
      slots_.push_back(s);
    }
  }
  backends_.resize(slots_.size());
  for (const auto& e : spec_.faults) {
    if ((e.kind == FaultEvent::Kind::Crash || e.kind == FaultEvent::Kind::Recover) && !nodes.count(e.target)) {
      throw ConfigError("fault script names unknown worker '" + e.target + "'");
    }
    if (e.kind == FaultEvent::Kind::Fail) fail_budget_[e.target] += e.count;
    else timed_.push_back(e);
  }
  std::stable_sort(timed_.begin(), timed_.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
}

FitnessBackend& SimulatedFarm::backend_for(std::size_t slot, const BackendConfig& cfg) {
  auto& entry = backends_[slot];
  if (!entry.second || !(entry.first == cfg)) entry = {cfg, make_backend(cfg)};
  return *entry.second;
}

void SimulatedFarm::kill_process(Slot& slot) {
  live_.erase(slot.pid);
  slot.busy = false;
}

std::string SimulatedFarm::trace_text() const {
  std::string out;
  for (const auto& e : trace_) out += e.to_string() + "\n";
  return out;
}

std::vector<std::string> SimulatedFarm::slot_statuses() const {
  std::vector<std::string> out;
  for (const auto& s : slots_) {
    out.push_back(spec_.workers[s.worker].node + ":" + std::to_string(s.index) + " " +
                  (s.lost ? "lost" : s.busy ? "busy" : "idle"));
  }
  return out;
}

std::vector<JobOutcome> SimulatedFarm::execute(std::span<const JobSpec> jobs) {
  if (interrupted_) throw InterruptedError("simulated farm was interrupted");
  const double t0 = now_;
  std::vector<JobOutcome> outcomes(jobs.size());
  std::vector<int> attempts(jobs.size(), 0);
  std::vector<bool> done(jobs.size(), false);
  std::size_t remaining = jobs.size();
  std::deque<std::size_t> pending;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    outcomes[j].name = jobs[j].name;
    outcomes[j].id = jobs[j].id;
    pending.push_back(j);
  }
  accounting_.jobs += static_cast<std::int64_t>(jobs.size());

  auto node_of = [&](const Slot& s) -> const std::string& { return spec_.workers[s.worker].node; };
  auto finish = [&](std::size_t j, std::string error) {
    outcomes[j].attempts = attempts[j];
    if (!error.empty()) {
      outcomes[j].error = std::move(error);
      ++accounting_.failed;
    }
    done[j] = true;
    --remaining;
  };
  auto requeue_or_fail = [&](std::size_t j, const std::string& error) {
    if (attempts[j] <= spec_.retries) pending.push_back(j);
    else finish(j, error + " (after " + std::to_string(attempts[j]) + " attempts)");
  };
  auto dispatch = [&](std::size_t si, std::size_t j) {
    Slot& s = slots_[si];
    const JobSpec& job = jobs[j];
    ++attempts[j];
    ++accounting_.attempts;
    s.busy = true;
    s.job = j;
    s.claimed = now_;
    s.start = now_ + spec_.dispatch_overhead_s;
    s.logs.clear();
    s.fails = false;
    s.error.clear();
    auto& budget = fail_budget_[job.name];
    if (budget > 0) {
      --budget;
      s.fails = true;
      s.error = "scripted trainer failure";
    } else {
      try {
        JobContext ctx{[&s](const std::string& line) { s.logs.push_back(line); }, nullptr};
        s.result = backend_for(si, job.backend).run(job, s.index, ctx);
      } catch (const Error& e) {
        s.fails = true;
        s.error = e.what();
      }
    }
    double d = spec_.job_duration_s > 0 ? spec_.job_duration_s : (s.fails ? 0.0 : s.result.duration_s);
    if (spec_.jitter > 0) d *= 1.0 + spec_.jitter * std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
    s.end = s.start + d;
    s.pid = next_pid_++;
    live_.insert(s.pid);
    bus_.put_process({job.name, node_of(s), s.index, s.pid, s.start});
    trace_.push_back({now_, "dispatch", job.name, node_of(s), s.index, attempts[j]});
  };
  auto assign = [&] {
    for (std::size_t si = 0; si < slots_.size() && !pending.empty(); ++si) {
      if (slots_[si].lost || slots_[si].busy) continue;
      const auto j = pending.front();
      pending.pop_front();
      dispatch(si, j);
    }
  };
  auto complete = [&](std::size_t si) {
    Slot& s = slots_[si];
    const std::size_t j = s.job;
    const JobSpec& job = jobs[j];
    now_ = s.end;
    accounting_.busy_seconds += s.end - s.start;
    kill_process(s);
    bus_.remove_process(job.name);
    for (const auto& line : s.logs) bus_.publish(LogRecord{job.name, line});
    if (!s.fails) {
      trace_.push_back({now_, "finish", job.name, node_of(s), s.index, attempts[j]});
      JobResult r = s.result;
      r.duration_s = s.end - s.start;
      outcomes[j].result = r;
      bus_.publish(FitnessRecord{job.name, job.id, r.fitness, r.duration_s});
      finish(j, "");
    } else {
      trace_.push_back({now_, "fail", job.name, node_of(s), s.index, attempts[j]});
      bus_.publish(LogRecord{job.name, "attempt " + std::to_string(attempts[j]) + " failed: " + s.error});
      requeue_or_fail(j, "JobFailed: " + s.error);
    }
  };
  auto apply_fault = [&](const FaultEvent& e) {
    now_ = std::max(now_, e.time);
    if (e.kind == FaultEvent::Kind::Crash) {
      for (auto& s : slots_) {
        if (node_of(s) != e.target) continue;
        if (s.busy) {
          const auto j = s.job;
          trace_.push_back({now_, "lost", jobs[j].name, node_of(s), s.index, attempts[j]});
          accounting_.busy_seconds += std::max(0.0, now_ - s.start);
          kill_process(s);
          bus_.remove_process(jobs[j].name);
          bus_.publish(LogRecord{jobs[j].name, "worker " + e.target + " lost during attempt " +
                                                   std::to_string(attempts[j])});
          requeue_or_fail(j, "WorkerLostError: worker " + e.target + " lost");
        }
        s.lost = true;
      }
    } else if (e.kind == FaultEvent::Kind::Recover) {
      for (auto& s : slots_) {
        if (node_of(s) == e.target) s.lost = false;
      }
    } else if (e.kind == FaultEvent::Kind::Interrupt) {
      kill_all(
          bus_,
          [&](const ProcessRecord& p) {
            for (auto& s : slots_) {
              if (!s.busy || s.pid != p.pid) continue;
              trace_.push_back({now_, "kill", p.job, node_of(s), s.index, attempts[s.job]});
              accounting_.busy_seconds += std::max(0.0, now_ - s.start);
              kill_process(s);
              return !s.lost;
            }
            return false;
          },
          nullptr, nullptr);
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (done[j]) continue;
        outcomes[j].interrupted = true;
        outcomes[j].attempts = attempts[j];
        outcomes[j].error = "interrupted";
        done[j] = true;
      }
      pending.clear();
      remaining = 0;
      interrupted_ = true;
    }
  };

  while (remaining > 0) {
    assign();
    std::optional<std::size_t> next;
    for (std::size_t si = 0; si < slots_.size(); ++si) {
      if (slots_[si].busy && (!next || slots_[si].end < slots_[*next].end)) next = si;
    }
    const bool fault_pending = next_fault_ < timed_.size();
    if (!next) {
      if (!fault_pending) {
        while (!pending.empty()) {
          const auto j = pending.front();
          pending.pop_front();
          finish(j, "WorkerLostError: no live worker slot");
        }
        break;
      }
      apply_fault(timed_[next_fault_++]);
    } else if (fault_pending && timed_[next_fault_].time < slots_[*next].end) {
      apply_fault(timed_[next_fault_++]);
    } else {
      complete(*next);
    }
  }
  accounting_.wall_seconds += now_ - t0;
  return outcomes;
}

}  // namespace enasfarm
