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


#include "enasfarm/worker.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>

#include "enasfarm/errors.hpp"
#include "enasfarm/protocol.hpp"

namespace enasfarm {

using nlohmann::json;

// ---------------------------------------------------------------- SlotRunner

SlotRunner::SlotRunner(int slots, WorkerBackendOptions options) : options_(std::move(options)) {
  if (slots < 1) throw ConfigError("a worker needs at least one slot");
  if (!options_.kind.empty() && options_.kind != "surrogate" && options_.kind != "lookup" &&
      options_.kind != "command") {
    throw ConfigError("unknown backend kind '" + options_.kind + "'");
  }
  running_.resize(static_cast<std::size_t>(slots));
  pid_.resize(static_cast<std::size_t>(slots), 0);
  backends_.resize(static_cast<std::size_t>(slots));
}

BackendConfig SlotRunner::resolve(const BackendConfig& requested) const {
  if (!options_.kind.empty() && requested.kind != options_.kind) {
    throw JobFailed("worker serves '" + options_.kind + "' jobs, got a '" + requested.kind + "' job");
  }
  BackendConfig cfg = requested;
  if (!options_.command.empty()) cfg.command = options_.command;
  if (!options_.table.empty()) cfg.table = options_.table;
  return cfg;
}

JobResult SlotRunner::run(const JobSpec& job, int slot, const JobContext& ctx) {
  FitnessBackend* backend = nullptr;
  const auto i = static_cast<std::size_t>(slot);
  {
    std::lock_guard lock(mu_);
    if (slot < 0 || i >= running_.size()) throw JobFailed("no slot " + std::to_string(slot) + " on this worker");
    if (!running_[i].empty()) throw JobFailed("slot " + std::to_string(slot) + " is running " + running_[i]);
    const BackendConfig cfg = resolve(job.backend);
    auto& entry = backends_[i];
    try {
      if (!entry.second || !(entry.first == cfg)) entry = {cfg, make_backend(cfg)};
    } catch (const ConfigError& e) {
      throw JobFailed(e.what());
    }
    backend = entry.second.get();
    running_[i] = job.name;
    pid_[i] = 0;
  }
  JobContext inner{ctx.log, [&](long pid) {
                     {
                       std::lock_guard lock(mu_);
                       pid_[i] = pid;
                     }
                     if (ctx.on_spawn) ctx.on_spawn(pid);
                   }};
  auto clear = [&] {
    std::lock_guard lock(mu_);
    running_[i].clear();
    pid_[i] = 0;
  };
  try {
    const JobResult r = backend->run(job, slot, inner);
    clear();
    return r;
  } catch (...) {
    clear();
    throw;
  }
}

std::vector<SlotReport> SlotRunner::report() const {
  std::lock_guard lock(mu_);
  std::vector<SlotReport> out;
  for (std::size_t i = 0; i < running_.size(); ++i) out.push_back({static_cast<int>(i), running_[i]});
  return out;
}

std::vector<long> SlotRunner::pids() const {
  std::lock_guard lock(mu_);
  return pid_;
}

bool SlotRunner::kill(long pid) {
  std::lock_guard lock(mu_);
  if (pid <= 0) return true;
  for (const long p : pid_) {
    if (p == pid) {
      ::kill(static_cast<pid_t>(-pid), SIGTERM);
      return true;
    }
  }
  return true;
}

// --------------------------------------------------------------- LocalWorker

LocalWorker::LocalWorker(std::string node, int slots, WorkerBackendOptions options)
    : node_(std::move(node)), runner_(slots, std::move(options)) {}

JobResult LocalWorker::run(const JobSpec& job, int slot, const JobContext& ctx) { return runner_.run(job, slot, ctx); }

std::optional<WorkerStatus> LocalWorker::status() {
  return WorkerStatus{node_, runner_.options().kind, runner_.report(), runner_.pids()};
}

// -------------------------------------------------------------- RemoteWorker

namespace {

WorkerStatus status_from_json(const json& j) {
  if (j.at("type") != "status") throw ProtocolError("expected a status reply");
  WorkerStatus st;
  st.node = j.at("node").get<std::string>();
  st.backend = j.at("backend").get<std::string>();
  for (const auto& s : j.at("slots")) {
    st.slots.push_back({s.at("slot").get<int>(), s.at("job").get<std::string>()});
    st.pids.push_back(s.at("pid").get<long>());
  }
  return st;
}

}  // namespace

RemoteWorker::RemoteWorker(std::string address, double connect_timeout_s)
    : address_(std::move(address)), timeout_s_(connect_timeout_s) {
  std::tie(host_, port_) = parse_address(address_);
  const auto st = status();
  if (!st) throw WorkerLostError("worker " + address_ + " is not answering");
  slots_ = static_cast<int>(st->slots.size());
}

JobResult RemoteWorker::run(const JobSpec& job, int slot, const JobContext& ctx) {
  Socket s(connect_tcp(host_, port_, timeout_s_));
  {
    std::lock_guard lock(mu_);
    active_.insert(s.fd());
  }
  struct Unregister {
    RemoteWorker* self;
    int fd;
    ~Unregister() {
      std::lock_guard lock(self->mu_);
      self->active_.erase(fd);
    }
  } unregister{this, s.fd()};

  json request = job_to_json(job);
  request["type"] = "job";
  request["slot"] = slot;
  send_message(s.fd(), request);
  for (;;) {
    const auto reply = recv_message(s.fd());
    if (!reply) throw WorkerLostError("worker " + address_ + " closed the connection during " + job.name);
    const auto type = reply->at("type").get<std::string>();
    try {
      if (type == "log") {
        if (ctx.log) ctx.log(reply->at("line").get<std::string>());
      } else if (type == "started") {
        if (ctx.on_spawn) ctx.on_spawn(reply->at("pid").get<long>());
      } else if (type == "fitness") {
        if (reply->at("identifier").get<std::string>() != job.id.hex()) {
          throw ProtocolError("fitness for a different identifier");
        }
        return {Fitness::parse(reply->at("value").get<std::string>()), reply->at("duration_s").get<double>()};
      } else if (type == "error") {
        throw JobFailed(reply->at("message").get<std::string>());
      } else {
        throw ProtocolError("unexpected message type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("malformed reply: ") + e.what());
    } catch (const ParseError& e) {
      throw ProtocolError(std::string("malformed reply: ") + e.what());
    }
  }
}

std::optional<WorkerStatus> RemoteWorker::status() {
  try {
    Socket s(connect_tcp(host_, port_, timeout_s_));
    send_message(s.fd(), json{{"type", "status"}});
    const auto reply = recv_message(s.fd(), timeout_s_);
    if (!reply) return std::nullopt;
    return status_from_json(*reply);
  } catch (const Error&) {
    return std::nullopt;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool RemoteWorker::kill(long pid) {
  try {
    Socket s(connect_tcp(host_, port_, timeout_s_));
    send_message(s.fd(), json{{"type", "kill"}, {"pid", pid}});
    const auto reply = recv_message(s.fd(), timeout_s_);
    return reply && reply->at("type") == "ack";
  } catch (const Error&) {
    return false;
  } catch (const json::exception&) {
    return false;
  }
}

void RemoteWorker::abort_all() {
  std::lock_guard lock(mu_);
  for (const int fd : active_) ::shutdown(fd, SHUT_RDWR);
}

// -------------------------------------------------------------- WorkerServer

WorkerServer::WorkerServer(std::string host, int port, int slots, WorkerBackendOptions options)
    : host_(std::move(host)), port_(port), runner_(slots, std::move(options)) {}

WorkerServer::~WorkerServer() { stop(); }

void WorkerServer::start() {
  listen_fd_ = listen_tcp(host_, port_, &port_);
  stop_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void WorkerServer::accept_loop() {
  while (!stop_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lock(mu_);
    for (auto it = handlers_.begin(); it != handlers_.end();) {
      if (*it->done) {
        it->thread.join();
        it = handlers_.erase(it);
      } else {
        ++it;
      }
    }
    auto done = std::make_shared<std::atomic<bool>>(false);
    handlers_.push_back({std::thread([this, fd, done] {
                           handle(fd);
                           *done = true;
                         }),
                         done});
  }
}

void WorkerServer::handle(int raw) {
  Socket s(raw);
  try {
    const auto msg = recv_message(s.fd(), 30.0);
    if (!msg) return;
    const auto type = msg->at("type").get<std::string>();
    if (type == "status") {
      json slots = json::array();
      const auto report = runner_.report();
      const auto pids = runner_.pids();
      for (std::size_t i = 0; i < report.size(); ++i) {
        slots.push_back({{"slot", report[i].slot}, {"job", report[i].job}, {"pid", pids[i]}});
      }
      send_message(s.fd(), {{"type", "status"}, {"node", address()}, {"backend", runner_.options().kind}, {"slots", slots}});
    } else if (type == "kill") {
      const bool killed = runner_.kill(msg->at("pid").get<long>());
      send_message(s.fd(), {{"type", "ack"}, {"killed", killed}});
    } else if (type == "job") {
      const JobSpec job = job_from_json(*msg);
      const int slot = msg->at("slot").get<int>();
      bool connected = true;
      auto guarded_send = [&](const json& m) {
        if (!connected) return;
        try {
          send_message(s.fd(), m);
        } catch (const WorkerLostError&) {
          connected = false;
        }
      };
      JobContext ctx{[&](const std::string& line) { guarded_send({{"type", "log"}, {"name", job.name}, {"line", line}}); },
                     [&](long pid) { guarded_send({{"type", "started"}, {"pid", pid}}); }};
      try {
        const JobResult r = runner_.run(job, slot, ctx);
        if (stop_) return;  // shutting down: the job did not complete here
        guarded_send({{"type", "fitness"},
                      {"identifier", job.id.hex()},
                      {"value", r.fitness.to_string()},
                      {"duration_s", r.duration_s}});
      } catch (const Error& e) {
        // A trainer killed by stop() is a lost node, not a failed job.
        if (stop_) return;
        guarded_send({{"type", "error"}, {"message", e.what()}});
      }
    } else {
      send_message(s.fd(), {{"type", "error"}, {"message", "unknown message type '" + type + "'"}});
    }
  } catch (const std::exception& e) {
    try {
      send_message(s.fd(), {{"type", "error"}, {"message", e.what()}});
    } catch (const std::exception&) {
    }
  }
}

void WorkerServer::stop() {
  if (stop_.exchange(true) && !acceptor_.joinable()) return;
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  for (const long pid : runner_.pids()) {
    if (pid > 0) runner_.kill(pid);
  }
  std::vector<Handler> handlers;
  {
    std::lock_guard lock(mu_);
    handlers.swap(handlers_);
  }
  for (auto& h : handlers) h.thread.join();
}

void WorkerServer::wait() {
  while (!stop_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace enasfarm
