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
#include <memory>
#include <string>
#include <vector>

#include "enasfarm/operators.hpp"
#include "enasfarm/population.hpp"
#include "enasfarm/search_space.hpp"

namespace enasfarm {

struct StrategyConfig {
  std::string strategy = "elitist_ga";
  int pop_size = 20;
  /// Generations evaluated in total, the initial population included, so
  /// pop_size * max_gen is the evaluation budget of a generational run.
  int max_gen = 20;
  double p_c = 0.9;
  double p_m = 0.1;
  int tournament_size = 2;
  /// Aging strategy: members sampled per child.
  int sample_size = 5;
  /// Aging strategy: children per generation (0 = pop_size / 2).
  int aging_batch = 0;
  std::uint64_t seed = 1;
  SearchSpace space;

  /// Throws ConfigError.
  void check() const;

  bool operator==(const StrategyConfig&) const = default;
};

/// One evolutionary search algorithm. Strategies are stateless between calls;
/// everything they need lives in the population and the rng handed to them.
class Strategy {
 public:
  explicit Strategy(StrategyConfig config);
  virtual ~Strategy() = default;

  const StrategyConfig& config() const { return config_; }
  virtual std::string_view name() const = 0;

  /// pop_size uniform samples named indi_gen00_noXX, generation 0.
  virtual Population initialize(Rng& rng) const;

  /// Q_t for parents P_t (all evaluated). Names carry generation t + 1.
  virtual std::vector<Individual> offspring(const Population& parents, Rng& rng) const = 0;

  /// P_{t+1} from P_t and the evaluated Q_t.
  virtual Population survive(const Population& parents, std::span<const Individual> offspring) const = 0;

 protected:
  /// Tournament parents, crossover, mutation until pop_size children exist.
  std::vector<Individual> generational_offspring(const Population& parents, Rng& rng) const;

  StrategyConfig config_;
};

/// initialize_population(cfg, rng): same as Strategy::initialize.
Population initialize_population(const StrategyConfig& config, Rng& rng);

/// Keys accepted by run_algorithm: elitist_ga, variable_ga, aging_evolution, nsga2.
std::vector<std::string> strategy_names();
/// Default encoding for a strategy key.
Scheme default_scheme(std::string_view strategy);
std::unique_ptr<Strategy> make_strategy(const StrategyConfig& config);

}  // namespace enasfarm
