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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enasfarm/job.hpp"
#include "enasfarm/record_bus.hpp"

namespace enasfarm {

struct JobOutcome {
  std::string name;
  Identifier id;
  std::optional<JobResult> result;  // empty when every attempt failed
  std::string error;
  int attempts = 0;
  bool interrupted = false;
};

/// Device-time bookkeeping of a farm. busy_seconds sums the time slots spent
/// running attempts, so GPU-days = busy_seconds / 86400.
struct FarmAccounting {
  std::int64_t jobs = 0;
  std::int64_t attempts = 0;
  std::int64_t failed = 0;
  double busy_seconds = 0.0;
  double wall_seconds = 0.0;

  double gpu_days() const { return busy_seconds / 86400.0; }
  FarmAccounting& operator+=(const FarmAccounting& o);
  /// key=value lines, as stored in farm.txt.
  std::string serialize() const;
  static FarmAccounting parse(const std::string& text);
};

/// Runs batches of fitness jobs somewhere. Implementations publish a
/// ProcessRecord while a job runs, its log lines, and one FitnessRecord per
/// successful job on their bus.
class JobExecutor {
 public:
  virtual ~JobExecutor() = default;
  /// Blocks until every job has succeeded or exhausted its retries.
  /// Outcomes are in input order.
  virtual std::vector<JobOutcome> execute(std::span<const JobSpec> jobs) = 0;
  virtual FarmAccounting accounting() const = 0;
  virtual RecordBus& bus() = 0;
};

}  // namespace enasfarm
