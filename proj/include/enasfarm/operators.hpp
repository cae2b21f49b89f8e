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

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "enasfarm/population.hpp"
#include "enasfarm/search_space.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

// ---------------------------------------------------------------- selection

/// Samples `k` members without replacement and returns the index of the one
/// with the highest accuracy; ties go to the earlier draw.
std::size_t tournament_select(const Population& pop, int k, Rng& rng);

/// Index i with probability fitness_i / sum. Falls back to a uniform draw
/// when every fitness is zero.
std::size_t roulette_select(const Population& pop, Rng& rng);

// ---------------------------------------------------------------- variation

/// With probability p_c recombines (FixedBinary: one-point over the flat bit
/// string; VariableBlocks: independent cut in each parent, tails swapped;
/// CellGraph: one-point over the node list when the result stays valid),
/// otherwise returns copies. Throws SchemeError on mixed schemes.
std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, double p_c,
                                        const SearchSpace& space, Rng& rng);

/// One-point FixedBinary crossover; `cut` bits come from the first parent.
std::pair<Genotype, Genotype> crossover_fixed_binary(const Genotype& a, const Genotype& b, std::size_t cut);

/// VariableBlocks crossover: a[:cut_a] + b[cut_b:] and b[:cut_b] + a[cut_a:].
/// No validity check.
std::pair<Genotype, Genotype> crossover_variable_blocks(const Genotype& a, const Genotype& b,
                                                        std::size_t cut_a, std::size_t cut_b);

/// FixedBinary: independent per-bit flips. VariableBlocks: with probability
/// p_m one of add / remove / alter. CellGraph: with probability p_m rewire one
/// edge or relabel one op. Invalid results are resampled; gives up with
/// MutationStuckError after a bounded number of attempts.
Genotype mutate(const Genotype& g, double p_m, const SearchSpace& space, Rng& rng);

// ---------------------------------------------------------------- survival

/// Top `pop_size` of parents and offspring under ranks_before; the result
/// carries generation parents.generation + 1.
Population environmental_select_elitist(const Population& parents, std::span<const Individual> offspring,
                                        std::size_t pop_size);

/// Parent for the next aging child: index of the best of `sample_size`
/// uniformly drawn members. Throws ConfigError if sample_size > |pop|.
std::size_t aging_sample(const Population& pop, int sample_size, Rng& rng);

/// Appends `child` at the tail and removes the head (the oldest member).
void aging_replace(Population& pop, Individual child);

using EvaluateFn = std::function<void(Individual&)>;

/// One steady-state step: sample, mutate the sample winner, evaluate the
/// child through `evaluate`, append it and drop the oldest member.
void aging_step(Population& pop, int sample_size, double p_m, const SearchSpace& space, Rng& rng,
                const EvaluateFn& evaluate, const std::string& child_name);

/// A mutant of `parent` that differs from it; the aging strategy never
/// wastes an evaluation on a clone.
Genotype aging_mutant(const Genotype& parent, double p_m, const SearchSpace& space, Rng& rng);

// ---------------------------------------------------------------- multi-objective

/// Fronts of member indices (ascending within a front). Objectives are
/// minimized as (-accuracy, params); a dominates b when it is no worse in
/// both and strictly better in one.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Individual> members);

/// Crowding distance per position of `front` (indices into `members`).
/// Extremes of each objective get +infinity.
std::vector<double> crowding_distance(std::span<const Individual> members, std::span<const std::size_t> front);

/// Fills `capacity` slots front by front; the split front is truncated by
/// descending crowding distance, ties by name.
Population crowding_select(const Population& parents, std::span<const Individual> offspring,
                           std::size_t capacity);

}  // namespace enasfarm
