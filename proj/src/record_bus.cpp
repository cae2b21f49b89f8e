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


#include "enasfarm/record_bus.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>

#include "json.hpp"

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

using nlohmann::json;

// ------------------------------------------------------------------- records

std::string encode_record(const RunRecord& record) {
  json j;
  if (const auto* log = std::get_if<LogRecord>(&record)) {
    j = {{"kind", "log"}, {"job", log->job}, {"line", log->line}};
  } else {
    const auto& f = std::get<FitnessRecord>(record);
    j = {{"kind", "fitness"},
         {"job", f.job},
         {"identifier", f.id.hex()},
         {"value", f.fitness.to_string()},
         {"duration_s", f.duration_s}};
  }
  return j.dump();
}

RunRecord decode_record(const std::string& body) {
  try {
    const json j = json::parse(body);
    const auto kind = j.at("kind").get<std::string>();
    const auto job = j.at("job").get<std::string>();
    if (job.empty()) throw ProtocolError("record without job name");
    if (kind == "log") return LogRecord{job, j.at("line").get<std::string>()};
    if (kind == "fitness") {
      return FitnessRecord{job, Identifier(j.at("identifier").get<std::string>()),
                           Fitness::parse(j.at("value").get<std::string>()), j.at("duration_s").get<double>()};
    }
    throw ProtocolError("unknown record kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed record: ") + e.what());
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("malformed record: ") + e.what());
  }
}

namespace {

json process_to_json(const ProcessRecord& p) {
  return {{"job", p.job}, {"node", p.node}, {"slot", p.slot}, {"pid", p.pid}, {"start", p.start}};
}

ProcessRecord process_from_json(const json& j) {
  return {j.at("job").get<std::string>(), j.at("node").get<std::string>(), j.at("slot").get<int>(),
          j.at("pid").get<long>(), j.at("start").get<double>()};
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::uintmax_t size_or_zero(const std::filesystem::path& p) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(p, ec);
  return ec ? 0 : n;
}

}  // namespace

// -------------------------------------------------------------- InProcessBus

InProcessBus::InProcessBus(std::size_t capacity, std::chrono::milliseconds backpressure)
    : capacity_(std::max<std::size_t>(capacity, 1)), backpressure_(backpressure) {}

std::string InProcessBus::publish(const std::string& body) {
  std::unique_lock lock(mu_);
  if (!space_.wait_for(lock, backpressure_, [&] { return queue_.size() < capacity_; })) {
    throw BusError("record bus full for " + std::to_string(backpressure_.count()) + " ms");
  }
  char rid[24];
  std::snprintf(rid, sizeof rid, "m%016llx", static_cast<unsigned long long>(next_++));
  queue_.push_back({rid, body});
  return rid;
}

std::vector<BusMessage> InProcessBus::peek(std::size_t max) const {
  std::lock_guard lock(mu_);
  const auto n = std::min(max, queue_.size());
  return {queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(n)};
}

void InProcessBus::remove(const std::string& rid) {
  {
    std::lock_guard lock(mu_);
    const auto it = std::find_if(queue_.begin(), queue_.end(), [&](const BusMessage& m) { return m.rid == rid; });
    if (it != queue_.end()) queue_.erase(it);
  }
  space_.notify_all();
}

std::size_t InProcessBus::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void InProcessBus::put_process(const ProcessRecord& record) {
  std::lock_guard lock(mu_);
  procs_[record.job] = record;
}

void InProcessBus::remove_process(const std::string& job) {
  std::lock_guard lock(mu_);
  procs_.erase(job);
}

std::vector<ProcessRecord> InProcessBus::processes() const {
  std::lock_guard lock(mu_);
  std::vector<ProcessRecord> out;
  for (const auto& [job, p] : procs_) out.push_back(p);
  return out;
}

// ------------------------------------------------------------------- FileBus

FileBus::FileBus(std::filesystem::path dir, std::size_t spool_capacity)
    : dir_(std::move(dir)), spool_capacity_(spool_capacity) {
  std::filesystem::create_directories(dir_ / "records");
  std::filesystem::create_directories(dir_ / "procs");
}

std::string FileBus::next_rid_locked() {
  const auto now = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
  last_stamp_ = std::max(now, last_stamp_ + 1);
  char rid[64];
  std::snprintf(rid, sizeof rid, "%020llu-%d-%llu", static_cast<unsigned long long>(last_stamp_),
                static_cast<int>(::getpid()), static_cast<unsigned long long>(counter_++));
  return rid;
}

bool FileBus::flush_locked() {
  if (spool_.empty()) return true;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) return false;
  std::filesystem::create_directories(dir_ / "records", ec);
  while (!spool_.empty()) {
    try {
      write_file_atomic(dir_ / "records" / (spool_.front().rid + ".rec"), spool_.front().body);
    } catch (const PersistError&) {
      return false;
    }
    spool_.pop_front();
  }
  return true;
}

bool FileBus::flush() {
  std::lock_guard lock(mu_);
  return flush_locked();
}

std::size_t FileBus::spooled() const {
  std::lock_guard lock(mu_);
  return spool_.size();
}

std::string FileBus::publish(const std::string& body) {
  std::lock_guard lock(mu_);
  BusMessage message{next_rid_locked(), body};
  if (flush_locked()) {
    try {
      write_file_atomic(dir_ / "records" / (message.rid + ".rec"), message.body);
      return message.rid;
    } catch (const PersistError&) {
    }
  }
  if (spool_.size() >= spool_capacity_) {
    throw BusError("record bus at " + dir_.string() + " unavailable and spool full");
  }
  spool_.push_back(std::move(message));
  return spool_.back().rid;
}

std::vector<BusMessage> FileBus::peek(std::size_t max) const {
  std::vector<std::string> names;
  std::error_code ec;
  for (std::filesystem::directory_iterator it(dir_ / "records", ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (ends_with(name, ".rec")) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::vector<BusMessage> out;
  for (const auto& name : names) {
    if (out.size() >= max) break;
    try {
      out.push_back({name.substr(0, name.size() - 4), read_file(dir_ / "records" / name)});
    } catch (const Error&) {
      // removed by a concurrent consumer
    }
  }
  return out;
}

void FileBus::remove(const std::string& rid) {
  std::error_code ec;
  std::filesystem::remove(dir_ / "records" / (rid + ".rec"), ec);
}

std::size_t FileBus::pending() const {
  std::size_t n = 0;
  std::error_code ec;
  for (std::filesystem::directory_iterator it(dir_ / "records", ec), end; !ec && it != end; it.increment(ec)) {
    if (ends_with(it->path().filename().string(), ".rec")) ++n;
  }
  return n;
}

void FileBus::put_process(const ProcessRecord& record) {
  write_file_atomic(dir_ / "procs" / (record.job + ".proc"), process_to_json(record).dump());
}

void FileBus::remove_process(const std::string& job) {
  std::error_code ec;
  std::filesystem::remove(dir_ / "procs" / (job + ".proc"), ec);
}

std::vector<ProcessRecord> FileBus::processes() const {
  std::vector<ProcessRecord> out;
  std::error_code ec;
  for (std::filesystem::directory_iterator it(dir_ / "procs", ec), end; !ec && it != end; it.increment(ec)) {
    if (!ends_with(it->path().filename().string(), ".proc")) continue;
    try {
      out.push_back(process_from_json(json::parse(read_file(it->path()))));
    } catch (const std::exception&) {
      // half-removed entry
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.job < b.job; });
  return out;
}

// ------------------------------------------------------------------ listener

ListenerPaths ListenerPaths::in(const std::filesystem::path& dir) {
  return {dir / "run.log", dir / "result.txt", dir / "dead_letter.txt", dir / "listener.journal"};
}

Listener::Listener(RecordBus& bus, FitnessCache* cache, ListenerPaths paths)
    : bus_(bus), cache_(cache), paths_(std::move(paths)) {
  recover();
}

Listener::~Listener() {
  if (worker_.joinable()) {
    stop_ = true;
    worker_.join();
  }
}

void Listener::recover() {
  if (!std::filesystem::exists(paths_.journal)) return;
  std::optional<std::vector<std::string>> intent;
  for (const auto& line : split(read_file(paths_.journal), '\n')) {
    const auto f = split(line, ' ');
    if (f.size() == 6 && f[0] == "B") {
      intent = f;
    } else if (f.size() == 2 && f[0] == "C") {
      applied_.insert(f[1]);
      if (intent && (*intent)[1] == f[1]) intent.reset();
    }
  }
  if (!intent) return;
  // The last record was interrupted mid-apply: roll its effects back.
  const std::filesystem::path files[] = {paths_.result, paths_.run_log, paths_.dead_letter,
                                         cache_ ? cache_->path() : std::filesystem::path{}};
  for (int i = 0; i < 4; ++i) {
    if (files[i].empty()) continue;
    const auto before = parse_int((*intent)[static_cast<std::size_t>(i) + 2]);
    if (!before) throw PersistError(paths_.journal.string() + ": corrupt intent line");
    if (std::filesystem::exists(files[i]) && size_or_zero(files[i]) > static_cast<std::uintmax_t>(*before)) {
      std::filesystem::resize_file(files[i], static_cast<std::uintmax_t>(*before));
    }
  }
  if (cache_) cache_->reload();
}

void Listener::maybe_crash(CrashPoint point) {
  if (armed_ && crash_point_ == point) {
    crash_point_ = CrashPoint::None;
    armed_ = false;
    throw ListenerCrash{};
  }
}

void Listener::inject_crash(CrashPoint point, std::size_t nth) {
  std::lock_guard lock(mu_);
  crash_point_ = point;
  crash_countdown_ = nth;
}

void Listener::apply(const BusMessage& message) {
  if (applied_.count(message.rid)) {
    bus_.remove(message.rid);
    ++stats_.skipped_duplicates;
    return;
  }
  const std::uintmax_t cache_size = cache_ ? size_or_zero(cache_->path()) : 0;
  append_line(paths_.journal, "B " + message.rid + " " + std::to_string(size_or_zero(paths_.result)) + " " +
                                  std::to_string(size_or_zero(paths_.run_log)) + " " +
                                  std::to_string(size_or_zero(paths_.dead_letter)) + " " +
                                  std::to_string(cache_size));
  maybe_crash(CrashPoint::AfterIntent);
  try {
    const RunRecord record = decode_record(message.body);
    if (const auto* log = std::get_if<LogRecord>(&record)) {
      append_line(paths_.run_log, "[" + log->job + "] " + log->line);
      ++stats_.log_lines;
    } else {
      const auto& f = std::get<FitnessRecord>(record);
      if (cache_ && cache_->insert(f.id, f.fitness)) ++stats_.cache_inserts;
      append_line(paths_.result, f.job + "=" + f.fitness.to_string());
      ++stats_.fitness_records;
    }
  } catch (const ProtocolError&) {
    std::string flat = message.body;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    append_line(paths_.dead_letter, message.rid + "\t" + flat);
    ++stats_.dead_letters;
  }
  maybe_crash(CrashPoint::AfterEffects);
  append_line(paths_.journal, "C " + message.rid);
  applied_.insert(message.rid);
  maybe_crash(CrashPoint::AfterCommit);
  bus_.remove(message.rid);
  ++stats_.consumed;
}

std::size_t Listener::drain(std::size_t limit) {
  std::lock_guard lock(mu_);
  std::size_t consumed = 0;
  while (consumed < limit) {
    const auto batch = bus_.peek(std::min<std::size_t>(limit - consumed, 256));
    if (batch.empty()) break;
    for (const auto& message : batch) {
      armed_ = false;
      if (crash_point_ != CrashPoint::None && !applied_.count(message.rid)) {
        if (crash_countdown_ == 0) armed_ = true;
        else --crash_countdown_;
      }
      const auto before = stats_.consumed;
      apply(message);
      consumed += stats_.consumed - before;
      if (consumed >= limit) break;
    }
  }
  if (!applied_.empty() && bus_.pending() == 0) {
    write_file_atomic(paths_.journal, "");
    applied_.clear();
  }
  return consumed;
}

void Listener::start(std::chrono::milliseconds period) {
  if (worker_.joinable()) return;
  stop_ = false;
  worker_ = std::thread([this, period] {
    while (!stop_) {
      drain();
      std::this_thread::sleep_for(period);
    }
  });
}

void Listener::stop() {
  if (worker_.joinable()) {
    stop_ = true;
    worker_.join();
  }
  drain();
}

Listener::Stats Listener::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

// ------------------------------------------------------------------ kill_all

std::size_t kill_all(RecordBus& bus, const TerminateFn& terminate, const QuarantineFn& quarantine,
                     Listener* listener) {
  std::size_t sent = 0;
  for (const auto& p : bus.processes()) {
    ++sent;
    if (!terminate(p)) {
      if (quarantine) quarantine(p);
      bus.publish(LogRecord{p.job, "kill: node " + p.node + " unreachable, slot " + std::to_string(p.slot) +
                                       " quarantined"});
    }
    bus.remove_process(p.job);
  }
  if (listener) listener->drain();
  return sent;
}

}  // namespace enasfarm
