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
#include <string>
#include <vector>

#include "enasfarm/fitness.hpp"
#include "enasfarm/genotype.hpp"

namespace enasfarm {

/// Objective 0 is accuracy (maximized), objective 1 the parameter count
/// (minimized, consulted only by the multi-objective strategy).
struct Objectives {
  Fitness accuracy;
  std::int64_t params = 0;
  bool operator==(const Objectives&) const = default;
};

class Individual {
 public:
  Individual() = default;
  /// Computes the identifier from the genotype.
  Individual(std::string name, Genotype genotype, int age);

  const std::string& name() const { return name_; }
  const Genotype& genotype() const { return genotype_; }
  const Identifier& id() const { return id_; }
  /// Birth generation.
  int age() const { return age_; }

  bool evaluated() const { return fitness_.has_value(); }
  const std::optional<Objectives>& objectives() const { return fitness_; }
  /// Throws EvaluationOrderError when unevaluated.
  const Objectives& fitness() const;
  Fitness accuracy() const { return fitness().accuracy; }

  /// Throws EvaluationOrderError when fitness is already set.
  void set_fitness(const Objectives& value);

  bool operator==(const Individual&) const = default;

 private:
  std::string name_;
  Genotype genotype_;
  Identifier id_;
  std::optional<Objectives> fitness_;
  int age_ = 0;
};

struct Population {
  int generation = 0;
  std::vector<Individual> members;

  std::size_t size() const { return members.size(); }
  bool all_evaluated() const;
  /// Highest accuracy; ties prefer the younger member, then the smaller name.
  const Individual& best() const;
  bool operator==(const Population&) const = default;
};

/// "indi_gen03_no07"
std::string individual_name(int generation, int index);
/// Birth generation encoded in an individual name, if it has that form.
std::optional<int> birth_generation(std::string_view name);

/// True when `a` ranks ahead of `b` under (accuracy desc, younger first,
/// name asc). Both must be evaluated.
bool ranks_before(const Individual& a, const Individual& b);

}  // namespace enasfarm
