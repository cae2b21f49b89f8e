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

#include "enasfarm/strategy.hpp"

#include <algorithm>

#include "enasfarm/errors.hpp"

namespace enasfarm {

void StrategyConfig::check() const {
  const auto names = strategy_names();
  if (std::find(names.begin(), names.end(), strategy) == names.end()) {
    throw ConfigError("unknown strategy '" + strategy + "'");
  }
  if (pop_size < 2) throw ConfigError("pop_size must be at least 2");
  if (max_gen < 0) throw ConfigError("max_gen must be non-negative");
  if (p_c < 0.0 || p_c > 1.0) throw ConfigError("p_c must lie in [0, 1]");
  if (p_m < 0.0 || p_m > 1.0) throw ConfigError("p_m must lie in [0, 1]");
  if (tournament_size < 2 || tournament_size > pop_size) {
    throw ConfigError("tournament_size must lie in [2, pop_size]");
  }
  if (strategy == "aging_evolution") {
    if (sample_size < 1 || sample_size > pop_size) throw ConfigError("sample_size must lie in [1, pop_size]");
    if (aging_batch < 0 || aging_batch > pop_size) throw ConfigError("aging_batch must lie in [0, pop_size]");
  }
  space.check();
}

Strategy::Strategy(StrategyConfig config) : config_(std::move(config)) { config_.check(); }

Population initialize_population(const StrategyConfig& config, Rng& rng) {
  config.space.check();
  Population pop{0, {}};
  pop.members.reserve(static_cast<std::size_t>(config.pop_size));
  for (int i = 0; i < config.pop_size; ++i) {
    pop.members.emplace_back(individual_name(0, i), config.space.sample(rng), 0);
  }
  return pop;
}

Population Strategy::initialize(Rng& rng) const { return initialize_population(config_, rng); }

std::vector<Individual> Strategy::generational_offspring(const Population& parents, Rng& rng) const {
  const int gen = parents.generation + 1;
  std::vector<Individual> children;
  children.reserve(static_cast<std::size_t>(config_.pop_size));
  while (children.size() < static_cast<std::size_t>(config_.pop_size)) {
    const auto& a = parents.members[tournament_select(parents, config_.tournament_size, rng)];
    const auto& b = parents.members[tournament_select(parents, config_.tournament_size, rng)];
    auto [g1, g2] = crossover(a.genotype(), b.genotype(), config_.p_c, config_.space, rng);
    g1 = mutate(g1, config_.p_m, config_.space, rng);
    g2 = mutate(g2, config_.p_m, config_.space, rng);
    children.emplace_back(individual_name(gen, static_cast<int>(children.size())), std::move(g1), gen);
    if (children.size() < static_cast<std::size_t>(config_.pop_size)) {
      children.emplace_back(individual_name(gen, static_cast<int>(children.size())), std::move(g2), gen);
    }
  }
  return children;
}

namespace {

/// Generational GA with elitist (mu + lambda) survival.
class ElitistGa final : public Strategy {
 public:
  using Strategy::Strategy;
  std::string_view name() const override { return "elitist_ga"; }
  std::vector<Individual> offspring(const Population& parents, Rng& rng) const override {
    return generational_offspring(parents, rng);
  }
  Population survive(const Population& parents, std::span<const Individual> offspring) const override {
    return environmental_select_elitist(parents, offspring, static_cast<std::size_t>(config_.pop_size));
  }
};

/// Same loop over variable-length block lists.
class VariableGa final : public Strategy {
 public:
  using Strategy::Strategy;
  std::string_view name() const override { return "variable_ga"; }
  std::vector<Individual> offspring(const Population& parents, Rng& rng) const override {
    return generational_offspring(parents, rng);
  }
  Population survive(const Population& parents, std::span<const Individual> offspring) const override {
    return environmental_select_elitist(parents, offspring, static_cast<std::size_t>(config_.pop_size));
  }
};

/// Batched aging evolution: each generation proposes `batch` mutants of
/// sample winners, then inserts them in order, each evicting the oldest.
class AgingEvolution final : public Strategy {
 public:
  using Strategy::Strategy;
  std::string_view name() const override { return "aging_evolution"; }

  int batch() const { return config_.aging_batch > 0 ? config_.aging_batch : std::max(1, config_.pop_size / 2); }

  std::vector<Individual> offspring(const Population& parents, Rng& rng) const override {
    const int gen = parents.generation + 1;
    std::vector<Individual> children;
    for (int i = 0; i < batch(); ++i) {
      const auto& parent = parents.members[aging_sample(parents, config_.sample_size, rng)];
      children.emplace_back(individual_name(gen, i),
                            aging_mutant(parent.genotype(), config_.p_m, config_.space, rng), gen);
    }
    return children;
  }

  Population survive(const Population& parents, std::span<const Individual> offspring) const override {
    Population next = parents;
    for (const auto& child : offspring) {
      if (!child.evaluated()) throw EvaluationOrderError("aging child " + child.name() + " has no fitness");
      aging_replace(next, child);
    }
    next.generation = parents.generation + 1;
    return next;
  }
};

/// Non-dominated sorting with crowding truncation over (accuracy, params).
class Nsga2 final : public Strategy {
 public:
  using Strategy::Strategy;
  std::string_view name() const override { return "nsga2"; }
  std::vector<Individual> offspring(const Population& parents, Rng& rng) const override {
    return generational_offspring(parents, rng);
  }
  Population survive(const Population& parents, std::span<const Individual> offspring) const override {
    return crowding_select(parents, offspring, static_cast<std::size_t>(config_.pop_size));
  }
};

}  // namespace

std::vector<std::string> strategy_names() { return {"elitist_ga", "variable_ga", "aging_evolution", "nsga2"}; }

Scheme default_scheme(std::string_view strategy) {
  if (strategy == "elitist_ga") return Scheme::FixedBinary;
  if (strategy == "variable_ga" || strategy == "nsga2") return Scheme::VariableBlocks;
  if (strategy == "aging_evolution") return Scheme::CellGraph;
  throw ConfigError("unknown strategy '" + std::string(strategy) + "'");
}

std::unique_ptr<Strategy> make_strategy(const StrategyConfig& config) {
  if (config.strategy == "elitist_ga") return std::make_unique<ElitistGa>(config);
  if (config.strategy == "variable_ga") return std::make_unique<VariableGa>(config);
  if (config.strategy == "aging_evolution") return std::make_unique<AgingEvolution>(config);
  if (config.strategy == "nsga2") return std::make_unique<Nsga2>(config);
  throw ConfigError("unknown strategy '" + config.strategy + "'");
}

}  // namespace enasfarm
