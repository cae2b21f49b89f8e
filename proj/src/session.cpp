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


#include "enasfarm/session.hpp"

#include "enasfarm/dispatcher.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"
#include "enasfarm/worker.hpp"

namespace enasfarm {

namespace fs = std::filesystem;

namespace {

void adopt_config(const fs::path& src, const fs::path& dst) {
  const auto text = read_file(src);
  if (!fs::exists(dst)) write_file_atomic(dst, text);
}

}  // namespace

Session::Session(const fs::path& global_ini, const fs::path& train_ini, const fs::path& root,
                 SessionOptions options)
    : Session(parse_configs(global_ini, train_ini), fs::path(), global_ini.parent_path(), std::move(options)) {
  run_dir_ = root / configs_.global.name;
  fs::create_directories(run_dir_);
  const auto g_copy = run_dir_ / "global.ini";
  const auto t_copy = run_dir_ / "train.ini";
  if (fs::exists(g_copy) && fs::exists(t_copy)) {
    const auto existing = parse_configs(g_copy, t_copy);
    if (!(existing.global.strategy.strategy == configs_.global.strategy.strategy &&
          existing.global.strategy.pop_size == configs_.global.strategy.pop_size &&
          existing.global.strategy.max_gen == configs_.global.strategy.max_gen &&
          existing.global.strategy.seed == configs_.global.strategy.seed)) {
      throw ConfigError(run_dir_.string() + " was created with different [algorithm]/[evolution] settings");
    }
    if (!(existing.train == configs_.train)) {
      throw ConfigError(run_dir_.string() + " was created with a different train.ini (digest " +
                        existing.train.digest() + ")");
    }
  }
  adopt_config(global_ini, g_copy);
  adopt_config(train_ini, t_copy);
  build();
}

Session::Session(ParsedConfigs configs, fs::path run_dir, fs::path config_dir, SessionOptions options)
    : configs_(std::move(configs)), run_dir_(std::move(run_dir)), config_dir_(std::move(config_dir)),
      options_(std::move(options)) {}

std::unique_ptr<Session> Session::open(const fs::path& run_dir, SessionOptions options) {
  auto configs = parse_configs(run_dir / "global.ini", run_dir / "train.ini");
  std::unique_ptr<Session> s(new Session(std::move(configs), run_dir, run_dir, std::move(options)));
  s->build();
  return s;
}

Session::~Session() {
  try {
    if (listener_) listener_->stop();
  } catch (const std::exception&) {
    // Records stay on the bus; the next listener replays them.
  }
}

bool Session::simulated_mode() const {
  return options_.force_simulated || configs_.global.farm.mode == "simulated";
}

void Session::build() {
  const auto& farm = configs_.global.farm;
  if (fs::exists(run_dir_ / "farm.txt")) base_ = FarmAccounting::parse(read_file(run_dir_ / "farm.txt"));

  if (farm.bus == "file") {
    bus_ = std::make_unique<FileBus>(run_dir_ / "bus");
  } else {
    bus_ = std::make_unique<InProcessBus>();
  }
  cache_ = std::make_unique<FitnessCache>(run_dir_ / "cache.txt", configs_.train.digest());
  listener_ = std::make_unique<Listener>(*bus_, cache_.get(), ListenerPaths::in(run_dir_));
  executor_ = make_executor(*bus_, store_, "slots", true, &sim_);

  const auto& space = configs_.global.strategy.space;
  EvaluatorOptions eo;
  eo.train = configs_.train;
  eo.input = space.input;
  eo.classes = space.classes;
  eo.decode = space.decode;
  eo.seed = configs_.global.strategy.seed;
  eo.use_cache = farm.cache;
  evaluator_ = std::make_unique<Evaluator>(eo, *executor_, *cache_, *listener_);
}

std::unique_ptr<JobExecutor> Session::make_executor(RecordBus& bus, std::unique_ptr<SlotStore>& store,
                                                    const std::string& state_tag, bool with_faults,
                                                    SimulatedFarm** sim) {
  const auto& farm = configs_.global.farm;
  if (simulated_mode()) {
    SimFarmSpec spec;
    spec.workers.clear();
    for (std::size_t i = 0; i < farm.slots.size(); ++i) {
      spec.workers.push_back({"sim" + std::to_string(i), farm.slots[i]});
    }
    spec.job_duration_s = farm.job_duration_s;
    spec.jitter = farm.jitter;
    spec.dispatch_overhead_s = farm.dispatch_overhead_s;
    spec.retries = farm.retries;
    spec.seed = configs_.global.strategy.seed;
    const auto script = options_.fault_script.empty() ? farm.fault_script : options_.fault_script;
    if (with_faults && !script.empty()) {
      fs::path p(script);
      if (p.is_relative() && options_.fault_script.empty()) p = config_dir_ / p;
      spec.faults = parse_fault_script(read_file(p), p.string());
    }
    auto farm_ptr = std::make_unique<SimulatedFarm>(spec, bus);
    if (sim) *sim = farm_ptr.get();
    return farm_ptr;
  }

  std::vector<std::unique_ptr<WorkerEndpoint>> workers;
  if (farm.mode == "local") {
    for (std::size_t i = 0; i < farm.slots.size(); ++i) {
      workers.push_back(std::make_unique<LocalWorker>("local" + std::to_string(i), farm.slots[i]));
    }
  } else {
    if (farm.workers.empty()) throw ConfigError("[farm] workers: remote mode needs at least one host:port");
    for (const auto& addr : farm.workers) workers.push_back(std::make_unique<RemoteWorker>(addr));
  }
  if (farm.store == "file") {
    store = std::make_unique<FileSlotStore>(run_dir_ / (state_tag + ".table"));
  } else {
    store = std::make_unique<InMemorySlotStore>(run_dir_ / (state_tag + ".txt"));
  }
  DispatcherOptions d;
  d.retries = farm.retries;
  d.poll_interval_s = farm.poll_interval_s;
  d.lost_timeout_s = farm.lost_timeout_s;
  if (sim) *sim = nullptr;
  return std::make_unique<Dispatcher>(std::move(workers), *store, bus, d);
}

FarmAccounting Session::accounting() const {
  FarmAccounting a = base_;
  a += executor_->accounting();
  return a;
}

void Session::save_accounting() const { write_file_atomic(run_dir_ / "farm.txt", accounting().serialize()); }

Individual Session::run(RunnerHooks hooks) {
  RunnerHooks mine;
  mine.before_save = [this, &hooks](int t) {
    save_accounting();
    if (hooks.before_save) hooks.before_save(t);
  };
  mine.after_save = hooks.after_save;
  Runner runner(run_dir_, configs_.global.strategy, *evaluator_, mine);
  auto best = runner.run();
  save_accounting();
  return best;
}

RetrainRecord Session::retrain(std::optional<TrainConfig> settings) {
  const TrainConfig cfg = settings ? *settings : retrain_defaults(configs_.train);
  InProcessBus bus;
  ListenerPaths paths{run_dir_ / "retrain.log", run_dir_ / "retrain_result.txt", run_dir_ / "retrain_dead_letter.txt",
                      run_dir_ / "retrain.journal"};
  Listener listener(bus, nullptr, paths);
  std::unique_ptr<SlotStore> store;
  auto executor = make_executor(bus, store, "retrain_slots", false, nullptr);
  auto rec = retrain_best(run_dir_, *executor, listener, cfg);
  executor.reset();
  listener.stop();
  return rec;
}

}  // namespace enasfarm
