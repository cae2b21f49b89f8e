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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "enasfarm/job.hpp"

namespace enasfarm {

/// Per-call hooks. `on_spawn` receives the pid of any child process so the
/// caller can publish it and terminate it later.
struct JobContext {
  LogSink log;
  std::function<void(long pid)> on_spawn;
};

/// A fitness producer bound to one worker slot.
class FitnessBackend {
 public:
  virtual ~FitnessBackend() = default;
  virtual std::string_view kind() const = 0;
  /// Throws JobFailed (or LookupMiss) when no fitness can be produced.
  virtual JobResult run(const JobSpec& job, int slot_id, const JobContext& ctx) = 0;
};

// ------------------------------------------------------------------ surrogate

/// a(g) in [0, 0.99]: rises with conv depth, jitters with the identifier
/// hash, and pays a small log-penalty on the parameter count.
double surrogate_asymptote(const ArchStats& stats, const Identifier& id);
/// sigma * (2v - 1) with v uniform in [0, 1) drawn from (seed, id).
double surrogate_noise(double sigma, std::uint64_t seed, const Identifier& id);
/// 100 * clamp(a * (1 - exp(-epochs / tau)) + noise, 0, 1).
double surrogate_percent(double asymptote, int epochs, double tau, double noise);
/// base_seconds + seconds_per_mac_epoch * flops * epochs.
double surrogate_duration(const BackendConfig& cfg, const ArchStats& stats, int epochs);
/// Closed form for `job`, deterministic in (genotype, settings, seed).
JobResult surrogate_fitness(const JobSpec& job);

class SurrogateBackend final : public FitnessBackend {
 public:
  std::string_view kind() const override { return "surrogate"; }
  JobResult run(const JobSpec& job, int slot_id, const JobContext& ctx) override;
};

// --------------------------------------------------------------------- lookup

struct LookupRow {
  Fitness fitness;
  std::int64_t params = -1;
  std::int64_t flops = -1;
};

/// CSV with header `identifier,fitness[,params,flops]`.
class LookupTable {
 public:
  static LookupTable parse(const std::string& text, const std::string& origin = "table");
  static LookupTable load(const std::filesystem::path& path);

  const LookupRow* find(const Identifier& id) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::unordered_map<Identifier, LookupRow> rows_;
};

class LookupBackend final : public FitnessBackend {
 public:
  /// With `fallback` a miss is answered by the surrogate, else LookupMiss.
  LookupBackend(LookupTable table, bool fallback) : table_(std::move(table)), fallback_(fallback) {}
  std::string_view kind() const override { return "lookup"; }
  JobResult run(const JobSpec& job, int slot_id, const JobContext& ctx) override;

 private:
  LookupTable table_;
  bool fallback_;
};

// -------------------------------------------------------------------- command

/// Replaces {payload_path}, {settings_path}, {slot_id} and {seed}.
std::string expand_command(std::string_view tmpl, const std::filesystem::path& payload_path,
                           const std::filesystem::path& settings_path, int slot_id, std::uint64_t seed);

/// Runs an external trainer through /bin/sh. The payload and settings are
/// written as JSON files, stdout and stderr lines stream to the log sink and
/// the final line must be `FITNESS=<dd.dd>`.
class CommandBackend final : public FitnessBackend {
 public:
  CommandBackend(std::string command_template, double timeout_s, std::filesystem::path work_dir = {});
  std::string_view kind() const override { return "command"; }
  JobResult run(const JobSpec& job, int slot_id, const JobContext& ctx) override;

 private:
  std::string template_;
  double timeout_s_;
  std::filesystem::path work_dir_;
};

/// Backend for `cfg.kind`; the lookup table is loaded eagerly.
std::unique_ptr<FitnessBackend> make_backend(const BackendConfig& cfg);

}  // namespace enasfarm
