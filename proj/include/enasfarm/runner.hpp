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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enasfarm/evaluator.hpp"
#include "enasfarm/population.hpp"
#include "enasfarm/strategy.hpp"

namespace enasfarm {

/// run_state.txt: `is_running=<0|1>`, `algorithm=<name>`, `generation=<t>`.
struct RunState {
  bool is_running = false;
  std::string algorithm;
  int generation = 0;
  bool operator==(const RunState&) const = default;
};

std::optional<RunState> read_run_state(const std::filesystem::path& run_dir);
void write_run_state(const std::filesystem::path& run_dir, const RunState& state);

/// `name=<name>;enc=<canonical>;id=<56 hex>;fit=<dd.dd|NA>`
std::string format_individual(const Individual& ind);
std::string format_population(const Population& pop);

std::filesystem::path population_log_path(const std::filesystem::path& run_dir, int t);
/// Generations with a begin_<t>.txt, ascending.
std::vector<int> list_generations(const std::filesystem::path& run_dir);

/// Writes begin_<t>.txt atomically. Every member must be evaluated; an
/// existing log is never replaced (PersistError).
void save_population(const std::filesystem::path& run_dir, int t, const Population& pop);

using ParamsFn = std::function<std::int64_t(const Genotype&)>;

/// Parses one log, re-deriving each identifier from its encoding. Throws
/// CorruptLogError naming the file. `params` fills objective 1.
Population load_population(const std::filesystem::path& path, int t, const ParamsFn& params = {});
/// Highest-numbered log. Throws RestartError when there is none.
std::pair<int, Population> load_latest_population(const std::filesystem::path& run_dir, const ParamsFn& params = {});

struct RunnerHooks {
  /// Before begin_<t>.txt is written.
  std::function<void(int t)> before_save;
  /// After begin_<t>.txt and run_state.txt are written.
  std::function<void(int t)> after_save;
};

/// The generational loop with log-based restart. Generation t uses an rng
/// seeded from (seed, t), so a resumed run replays the same variation.
class Runner {
 public:
  Runner(std::filesystem::path run_dir, StrategyConfig config, Evaluator& evaluator, RunnerHooks hooks = {});

  /// Starts fresh or resumes from the newest log, runs until max_gen
  /// generations exist, clears the running flag and returns the best member.
  Individual run();

  const Population& population() const { return pop_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }

 private:
  void persist(int t);

  std::filesystem::path run_dir_;
  StrategyConfig config_;
  std::unique_ptr<Strategy> strategy_;
  Evaluator& evaluator_;
  RunnerHooks hooks_;
  Population pop_;
};

}  // namespace enasfarm
