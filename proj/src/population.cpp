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

#include "enasfarm/population.hpp"

#include <algorithm>
#include <cstdio>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

Individual::Individual(std::string name, Genotype genotype, int age)
    : name_(std::move(name)), genotype_(std::move(genotype)), id_(identifier(genotype_)), age_(age) {}

const Objectives& Individual::fitness() const {
  if (!fitness_) throw EvaluationOrderError("individual " + name_ + " has not been evaluated");
  return *fitness_;
}

void Individual::set_fitness(const Objectives& value) {
  if (fitness_) throw EvaluationOrderError("individual " + name_ + " already has a fitness");
  fitness_ = value;
}

bool Population::all_evaluated() const {
  return std::all_of(members.begin(), members.end(), [](const Individual& i) { return i.evaluated(); });
}

bool ranks_before(const Individual& a, const Individual& b) {
  const auto fa = a.accuracy();
  const auto fb = b.accuracy();
  if (fa != fb) return fa > fb;
  if (a.age() != b.age()) return a.age() > b.age();
  return a.name() < b.name();
}

const Individual& Population::best() const {
  if (members.empty()) throw EvaluationOrderError("empty population has no best member");
  const Individual* best = &members.front();
  for (const auto& m : members) {
    if (ranks_before(m, *best)) best = &m;
  }
  return *best;
}

std::string individual_name(int generation, int index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "indi_gen%02d_no%02d", generation, index);
  return buf;
}

std::optional<int> birth_generation(std::string_view name) {
  if (!starts_with(name, "indi_gen")) return std::nullopt;
  const auto rest = name.substr(8);
  const auto us = rest.find("_no");
  if (us == std::string_view::npos) return std::nullopt;
  const auto gen = parse_int(rest.substr(0, us));
  if (!gen || *gen < 0 || !parse_int(rest.substr(us + 3))) return std::nullopt;
  return static_cast<int>(*gen);
}

}  // namespace enasfarm
