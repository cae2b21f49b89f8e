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


#include "enasfarm/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <deque>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace {

constexpr double kTwoTo64 = 18446744073709551616.0;

}  // namespace

// ------------------------------------------------------------------ surrogate

double surrogate_asymptote(const ArchStats& stats, const Identifier& id) {
  const double u = static_cast<double>(hex_prefix64(id.hex())) / kTwoTo64;
  const double a = 0.50 + 0.40 * (1.0 - std::exp(-static_cast<double>(stats.depth) / 8.0)) + 0.08 * (u - 0.5) -
                   0.02 * std::log1p(static_cast<double>(stats.params) / 1e6);
  return std::clamp(a, 0.0, 0.99);
}

double surrogate_noise(double sigma, std::uint64_t seed, const Identifier& id) {
  if (sigma == 0.0) return 0.0;
  const double v = static_cast<double>(mix64(seed ^ hex_prefix64(id.hex()))) / kTwoTo64;
  return sigma * (2.0 * v - 1.0);
}

double surrogate_percent(double asymptote, int epochs, double tau, double noise) {
  const double acc = asymptote * (1.0 - std::exp(-static_cast<double>(epochs) / tau)) + noise;
  return 100.0 * std::clamp(acc, 0.0, 1.0);
}

double surrogate_duration(const BackendConfig& cfg, const ArchStats& stats, int epochs) {
  return cfg.base_seconds + cfg.seconds_per_mac_epoch * static_cast<double>(stats.flops) * static_cast<double>(epochs);
}

JobResult surrogate_fitness(const JobSpec& job) {
  const double a = surrogate_asymptote(job.stats, job.id);
  const double noise = surrogate_noise(job.backend.noise, job.seed, job.id);
  const double percent = surrogate_percent(a, job.settings.total_epochs, job.backend.tau, noise);
  return {Fitness::from_percent(percent), surrogate_duration(job.backend, job.stats, job.settings.total_epochs)};
}

JobResult SurrogateBackend::run(const JobSpec& job, int, const JobContext& ctx) {
  const JobResult r = surrogate_fitness(job);
  if (ctx.log) {
    ctx.log("epoch " + std::to_string(job.settings.total_epochs) + " acc " + r.fitness.to_string());
  }
  return r;
}

// --------------------------------------------------------------------- lookup

LookupTable LookupTable::parse(const std::string& text, const std::string& origin) {
  LookupTable table;
  const auto lines = split(text, '\n');
  bool header = false;
  std::size_t columns = 0;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const auto where = origin + ":" + std::to_string(n + 1);
    if (!header) {
      if (fields.size() < 2 || trim(fields[0]) != "identifier" || trim(fields[1]) != "fitness" ||
          (fields.size() != 2 && fields.size() != 4) ||
          (fields.size() == 4 && (trim(fields[2]) != "params" || trim(fields[3]) != "flops"))) {
        throw ConfigError(where + ": expected header identifier,fitness[,params,flops]");
      }
      header = true;
      columns = fields.size();
      continue;
    }
    if (fields.size() != columns) throw ConfigError(where + ": expected " + std::to_string(columns) + " fields");
    LookupRow row;
    try {
      const Identifier id{std::string(trim(fields[0]))};
      row.fitness = Fitness::parse(trim(fields[1]));
      if (columns == 4) {
        const auto params = parse_int(trim(fields[2]));
        const auto flops = parse_int(trim(fields[3]));
        if (!params || !flops) throw ConfigError(where + ": params and flops must be integers");
        row.params = *params;
        row.flops = *flops;
      }
      if (!table.rows_.emplace(id, row).second) throw ConfigError(where + ": duplicate identifier");
    } catch (const ParseError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (!header) throw ConfigError(origin + ": empty lookup table");
  return table;
}

LookupTable LookupTable::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": lookup table not found");
  return parse(read_file(path), path.string());
}

const LookupRow* LookupTable::find(const Identifier& id) const {
  const auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

JobResult LookupBackend::run(const JobSpec& job, int slot_id, const JobContext& ctx) {
  if (const auto* row = table_.find(job.id)) return {row->fitness, 0.0};
  if (!fallback_) throw LookupMiss("identifier " + job.id.hex() + " not in lookup table");
  SurrogateBackend surrogate;
  return surrogate.run(job, slot_id, ctx);
}

// -------------------------------------------------------------------- command

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string tail(const std::deque<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

std::atomic<std::uint64_t> g_job_counter{0};

}  // namespace

std::string expand_command(std::string_view tmpl, const std::filesystem::path& payload_path,
                           const std::filesystem::path& settings_path, int slot_id, std::uint64_t seed) {
  std::string cmd(tmpl);
  replace_all(cmd, "{payload_path}", shell_quote(payload_path.string()));
  replace_all(cmd, "{settings_path}", shell_quote(settings_path.string()));
  replace_all(cmd, "{slot_id}", std::to_string(slot_id));
  replace_all(cmd, "{seed}", std::to_string(seed));
  return cmd;
}

CommandBackend::CommandBackend(std::string command_template, double timeout_s, std::filesystem::path work_dir)
    : template_(std::move(command_template)), timeout_s_(timeout_s), work_dir_(std::move(work_dir)) {
  if (template_.empty()) throw ConfigError("command backend needs a command template");
  if (work_dir_.empty()) {
    work_dir_ = std::filesystem::temp_directory_path() / ("enasfarm-jobs-" + std::to_string(::getpid()));
  }
}

JobResult CommandBackend::run(const JobSpec& job, int slot_id, const JobContext& ctx) {
  const auto dir = work_dir_ / (job.name + "-" + std::to_string(g_job_counter++));
  std::filesystem::create_directories(dir);
  const auto payload_path = dir / "payload.json";
  const auto settings_path = dir / "settings.json";
  const auto wire = job_to_json(job);
  nlohmann::json payload = wire["payload"];
  payload["name"] = job.name;
  payload["identifier"] = job.id.hex();
  write_file_atomic(payload_path, payload.dump(2) + "\n");
  write_file_atomic(settings_path, wire["settings"].dump(2) + "\n");
  const std::string cmd = expand_command(template_, payload_path, settings_path, slot_id, job.seed);

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw JobFailed(job.name + ": pipe: " + std::strerror(errno));
  const auto started = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw JobFailed(job.name + ": fork: " + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    const std::string device = std::to_string(slot_id);
    ::setenv("CUDA_VISIBLE_DEVICES", device.c_str(), 1);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  ::setpgid(pid, pid);
  if (ctx.on_spawn) ctx.on_spawn(static_cast<long>(pid));

  std::deque<std::string> recent;
  std::string pending, buffer, last_line;
  bool timed_out = false;
  char chunk[4096];
  auto emit = [&](std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) return;
    if (!last_line.empty() && ctx.log) ctx.log(last_line);
    last_line = std::move(line);
    recent.push_back(last_line);
    if (recent.size() > 5) recent.pop_front();
  };
  for (;;) {
    int wait_ms = -1;
    if (timeout_s_ > 0) {
      const double left = timeout_s_ - std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (left <= 0) {
        timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(std::ceil(left * 1000.0));
    }
    pollfd p{fds[0], POLLIN, 0};
    const int ready = ::poll(&p, 1, wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(fds[0], chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    for (std::size_t nl; (nl = buffer.find('\n')) != std::string::npos;) {
      emit(buffer.substr(0, nl));
      buffer.erase(0, nl + 1);
    }
  }
  if (timed_out) ::kill(-pid, SIGKILL);
  ::close(fds[0]);
  emit(buffer);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::error_code ignored;
  std::filesystem::remove_all(dir, ignored);

  if (timed_out) throw JobFailed(job.name + ": timed out after " + format_fixed(timeout_s_, 1) + " s" + tail(recent));
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string how = WIFEXITED(status) ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                              : "killed by signal " + std::to_string(WTERMSIG(status));
    throw JobFailed(job.name + ": trainer " + how + tail(recent));
  }
  if (!starts_with(last_line, "FITNESS=")) {
    if (!last_line.empty() && ctx.log) ctx.log(last_line);
    throw JobFailed(job.name + ": trainer output does not end with FITNESS=<dd.dd>" + tail(recent));
  }
  try {
    return {Fitness::parse(last_line.substr(8)), elapsed};
  } catch (const ParseError& e) {
    throw JobFailed(job.name + ": " + e.what());
  }
}

std::unique_ptr<FitnessBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == "surrogate") return std::make_unique<SurrogateBackend>();
  if (cfg.kind == "lookup") return std::make_unique<LookupBackend>(LookupTable::load(cfg.table), cfg.fallback);
  if (cfg.kind == "command") return std::make_unique<CommandBackend>(cfg.command, cfg.timeout_s);
  throw ConfigError("unknown backend kind '" + cfg.kind + "'");
}

}  // namespace enasfarm
