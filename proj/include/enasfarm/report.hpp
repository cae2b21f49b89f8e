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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enasfarm/config.hpp"
#include "enasfarm/executor.hpp"
#include "enasfarm/fitness.hpp"
#include "enasfarm/record_bus.hpp"

namespace enasfarm {

/// retrain.txt: `name=..;id=..;search=dd.dd;retrain=dd.dd;epochs=N`
struct RetrainRecord {
  std::string name;
  std::string id;
  Fitness search;
  Fitness retrain;
  int epochs = 0;
  double duration_s = 0.0;

  std::string to_string() const;
  /// Throws ReportError.
  static RetrainRecord parse(const std::string& line);
};

/// One line of the comparison table. Empty optionals print as NA.
struct ComparisonRow {
  std::string algorithm;
  std::optional<Fitness> search_acc;
  std::optional<Fitness> retrain_acc;
  std::optional<std::int64_t> params;
  std::optional<std::int64_t> flops;
  double gpu_days = 0.0;
  std::int64_t evaluations = 0;
  /// The run has not terminated normally.
  bool partial = false;
  /// Compared against runs with other trainer settings.
  bool mixed = false;
  std::string digest;
  std::filesystem::path dir;
};

/// Reads a run directory: the config copies, run_state.txt, the newest
/// population log, farm.txt and retrain.txt. Throws ReportError when `dir`
/// is not a run directory at all.
ComparisonRow summarize_run(const std::filesystem::path& dir);

struct Report {
  std::vector<ComparisonRow> rows;
  bool mixed = false;

  static constexpr const char* kCsvHeader = "algorithm,search_acc,retrain_acc,params,flops,gpu_days,evaluations";
  std::string csv() const;
  /// Aligned text with a legend.
  std::string table() const;
};

/// Rows sorted by retrain accuracy (NA last), then search accuracy, then
/// algorithm. Runs whose train.ini digests differ raise MixedSettingsError
/// unless `allow_mixed`, in which case every row is flagged.
Report compare(std::span<const std::filesystem::path> dirs, bool allow_mixed = false);

/// Trains the best member of a finished run once more with `retrain`
/// settings and writes retrain.txt. The result never enters the search
/// cache. Throws ReportError when the run is not complete or the job fails.
RetrainRecord retrain_best(const std::filesystem::path& run_dir, JobExecutor& executor, Listener& listener,
                           const TrainConfig& retrain);

}  // namespace enasfarm
