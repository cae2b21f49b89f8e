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

#include "enasfarm/util.hpp"

namespace enasfarm::testing {

inline std::filesystem::path source_dir() { return ENASFARM_SOURCE_DIR; }
inline std::filesystem::path toy_trainer() { return source_dir() / "tools" / "toy_trainer.py"; }

struct RunSpec {
  std::string name = "run";
  std::string algorithm = "elitist_ga";
  int max_gen = 3;
  int pop_size = 4;
  std::string evolution;  // extra lines for [evolution]
  std::string search;     // extra lines for [search]
  std::string farm = "mode = simulated\nslots = 4\n";
  int epochs = 50;
  std::string backend = "kind = surrogate\ntau = 20\nnoise = 0\n";
  std::string dataset = "CIFAR10";
};

inline std::string global_ini(const RunSpec& s) {
  return "[algorithm]\nname = " + s.name + "\nrun_algorithm = " + s.algorithm +
         "\nmax_gen = " + std::to_string(s.max_gen) + "\npop_size = " + std::to_string(s.pop_size) +
         "\n\n[evolution]\nseed = 7\n" + s.evolution + "\n[search]\n" + s.search + "\n[farm]\n" + s.farm;
}

inline std::string train_ini(const RunSpec& s) {
  return "[optimizer]\n_optimizer_name = SGD\n_batch_size = 64\n_total_epoch = " + std::to_string(s.epochs) +
         "\n\n[LearningRate]\nlr = 0.025\nlr_strategy = CosineAnnealingLR\n\n[dataset]\n_name = " + s.dataset +
         "\n\n[backend]\n" + s.backend;
}

/// Writes <dir>/<stem>global.ini and <dir>/<stem>train.ini.
inline std::pair<std::filesystem::path, std::filesystem::path> write_configs(const std::filesystem::path& dir,
                                                                               const RunSpec& s,
                                                                               const std::string& stem = "") {
  std::filesystem::create_directories(dir);
  const auto g = dir / (stem + "global.ini");
  const auto t = dir / (stem + "train.ini");
  write_file_atomic(g, global_ini(s));
  write_file_atomic(t, train_ini(s));
  return {g, t};
}

}  // namespace enasfarm::testing
