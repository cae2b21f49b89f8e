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
#include <string>
#include <vector>

#include "enasfarm/arch_ir.hpp"
#include "enasfarm/strategy.hpp"

namespace enasfarm {

// ------------------------------------------------------------------ train.ini

/// [optimizer] / [LearningRate] / [dataset]. Identical for every individual
/// of a run. Only total_epochs influences the bundled surrogate; the other
/// names are handed to external trainers unchanged.
struct TrainerSettings {
  std::string optimizer = "SGD";
  int batch_size = 64;
  int total_epochs = 50;
  double lr = 0.025;
  std::string lr_strategy = "CosineAnnealingLR";
  std::string dataset = "CIFAR10";

  bool operator==(const TrainerSettings&) const = default;
};

/// [backend]
struct BackendConfig {
  std::string kind = "surrogate";  // surrogate | lookup | command

  // surrogate
  double tau = 20.0;
  double noise = 0.0;
  double base_seconds = 30.0;
  double seconds_per_mac_epoch = 8e-8;

  // lookup
  std::string table;
  bool fallback = false;

  // command
  std::string command;
  double timeout_s = 0.0;  // 0 = unlimited

  bool operator==(const BackendConfig&) const = default;
};

struct TrainConfig {
  TrainerSettings trainer;
  BackendConfig backend;

  /// Canonical INI text; parsing it yields an equal TrainConfig.
  std::string to_ini() const;
  /// SHA-224 of to_ini(), recorded in cache headers and run directories.
  std::string digest() const;

  bool operator==(const TrainConfig&) const = default;
};

TrainConfig parse_train_config(const std::string& text, const std::string& origin = "train.ini");
TrainConfig load_train_config(const std::filesystem::path& path);

/// Retrain-phase settings: 600 epochs, batch 96, lr 0.025, cosine annealing.
TrainConfig retrain_defaults(const TrainConfig& search);

struct DatasetInfo {
  TensorShape input;
  int classes = 0;
};
/// MNIST, CIFAR10, CIFAR100, ImageNet. Throws ConfigError otherwise.
DatasetInfo dataset_info(const std::string& name);

const std::vector<std::string>& known_optimizers();
const std::vector<std::string>& known_lr_strategies();
const std::vector<std::string>& known_datasets();

// ----------------------------------------------------------------- global.ini

/// [farm]: where fitness jobs run.
struct FarmConfig {
  std::string mode = "simulated";  // simulated | local | remote
  std::vector<int> slots{4};       // per worker (simulated / local)
  std::vector<std::string> workers;  // host:port (remote)
  int retries = 2;
  double poll_interval_s = 2.0;
  double lost_timeout_s = 10.0;
  bool cache = true;
  double dispatch_overhead_s = 0.0;
  double job_duration_s = 0.0;  // simulated: 0 = use backend durations
  double jitter = 0.0;          // simulated: relative duration jitter
  std::string fault_script;     // simulated: path to a fault script
  std::string bus = "memory";   // memory | file (shared directory)
  std::string store = "memory"; // memory | file (flock-guarded table)

  bool operator==(const FarmConfig&) const = default;
};

struct GlobalConfig {
  std::string name = "run";        // run directory label
  StrategyConfig strategy;         // run_algorithm, max_gen, pop_size, [evolution], [search]
  FarmConfig farm;

  std::string to_ini() const;
  bool operator==(const GlobalConfig&) const = default;
};

GlobalConfig parse_global_config(const std::string& text, const std::string& origin = "global.ini");
GlobalConfig load_global_config(const std::filesystem::path& path);

struct ParsedConfigs {
  GlobalConfig global;
  TrainConfig train;
};
/// Reads both files, validates them against each other (the dataset fixes
/// the input shape) and returns the merged view.
ParsedConfigs parse_configs(const std::filesystem::path& global_path, const std::filesystem::path& train_path);

}  // namespace enasfarm
