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
#include <memory>
#include <optional>
#include <string>

#include "enasfarm/cache.hpp"
#include "enasfarm/config.hpp"
#include "enasfarm/evaluator.hpp"
#include "enasfarm/executor.hpp"
#include "enasfarm/record_bus.hpp"
#include "enasfarm/report.hpp"
#include "enasfarm/runner.hpp"
#include "enasfarm/sim_farm.hpp"
#include "enasfarm/slot_store.hpp"

namespace enasfarm {

struct SessionOptions {
  /// Run on the simulated farm whatever [farm] mode says.
  bool force_simulated = false;
  /// Replaces [farm] fault_script when non-empty.
  std::string fault_script;
};

/// Everything one run directory needs, wired from its two config files:
///
///   <root>/<name>/global.ini, train.ini   copies of the inputs
///   run_state.txt, begin_<t>.txt          runner state
///   cache.txt                             fitness cache
///   run.log, result.txt, listener.journal listener output
///   farm.txt                              accumulated device time and jobs
///   bus/, slots.*                         file bus / slot store, when chosen
///   retrain.txt                           written by retrain()
class Session {
 public:
  /// An existing run directory must have been created from the same search
  /// and trainer settings (ConfigError otherwise).
  Session(const std::filesystem::path& global_ini, const std::filesystem::path& train_ini,
          const std::filesystem::path& root, SessionOptions options = {});
  /// Reopens a run directory from its own config copies.
  static std::unique_ptr<Session> open(const std::filesystem::path& run_dir, SessionOptions options = {});
  ~Session();

  /// Runs or resumes the search. `hooks` run after the session's own.
  Individual run(RunnerHooks hooks = {});

  /// Retrains the final best on a separate bus and farm. Defaults to
  /// retrain_defaults() of the run's trainer settings.
  RetrainRecord retrain(std::optional<TrainConfig> settings = std::nullopt);

  const std::filesystem::path& run_dir() const { return run_dir_; }
  const ParsedConfigs& configs() const { return configs_; }
  RecordBus& bus() { return *bus_; }
  FitnessCache& cache() { return *cache_; }
  Listener& listener() { return *listener_; }
  JobExecutor& executor() { return *executor_; }
  Evaluator& evaluator() { return *evaluator_; }
  /// The simulated farm, or nullptr for a dispatcher.
  SimulatedFarm* simulated() { return sim_; }
  /// farm.txt as found at construction plus this session's executor.
  FarmAccounting accounting() const;
  /// Writes accounting() to farm.txt.
  void save_accounting() const;

 private:
  Session(ParsedConfigs configs, std::filesystem::path run_dir, std::filesystem::path config_dir,
          SessionOptions options);
  void build();
  bool simulated_mode() const;
  /// A farm per configuration. `store` receives the slot store a
  /// dispatcher needs; `state_tag` names its files.
  std::unique_ptr<JobExecutor> make_executor(RecordBus& bus, std::unique_ptr<SlotStore>& store,
                                             const std::string& state_tag, bool with_faults,
                                             SimulatedFarm** sim);

  ParsedConfigs configs_;
  std::filesystem::path run_dir_;
  std::filesystem::path config_dir_;
  SessionOptions options_;
  FarmAccounting base_;

  std::unique_ptr<RecordBus> bus_;
  std::unique_ptr<FitnessCache> cache_;
  std::unique_ptr<SlotStore> store_;
  std::unique_ptr<Listener> listener_;
  std::unique_ptr<JobExecutor> executor_;
  SimulatedFarm* sim_ = nullptr;
  std::unique_ptr<Evaluator> evaluator_;
};

}  // namespace enasfarm
