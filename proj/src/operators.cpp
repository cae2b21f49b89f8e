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

#include "enasfarm/operators.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "enasfarm/errors.hpp"

namespace enasfarm {

namespace {

constexpr int kMaxAttempts = 64;

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool bernoulli(double p, Rng& rng) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void require_evaluated(std::span<const Individual> members) {
  for (const auto& m : members) {
    if (!m.evaluated()) throw EvaluationOrderError("individual " + m.name() + " has no fitness yet");
  }
}

Genotype mutate_fixed_binary(const Genotype& g, double p_m, Rng& rng) {
  auto genes = g.fixed_binary();
  for (auto& b : genes.bits) {
    if (bernoulli(p_m, rng)) b ^= 1;
  }
  return genes;
}

std::optional<Genotype> try_mutate_blocks(const VariableBlockGenes& genes, const SearchSpace& space, Rng& rng) {
  auto blocks = genes.blocks;
  switch (uniform_index(3, rng)) {
    case 0: {  // add
      const auto pos = uniform_index(blocks.size() + 1, rng);
      BlockGene gene = uniform_index(4, rng) == 0
                           ? BlockGene::pool(uniform_index(2, rng) == 0 ? PoolType::Max : PoolType::Mean)
                           : space.sample_unit(rng);
      blocks.insert(blocks.begin() + static_cast<std::ptrdiff_t>(pos), gene);
      break;
    }
    case 1:  // remove
      blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(uniform_index(blocks.size(), rng)));
      break;
    default: {  // alter
      auto& gene = blocks[uniform_index(blocks.size(), rng)];
      if (gene.kind == BlockKind::Pool) {
        gene.pool_type = gene.pool_type == PoolType::Max ? PoolType::Mean : PoolType::Max;
      } else {
        gene = space.sample_unit(rng);
      }
      break;
    }
  }
  Genotype out(VariableBlockGenes{std::move(blocks)});
  if (!space.contains(out)) return std::nullopt;
  return out;
}

std::optional<Genotype> try_mutate_cell(const CellGraphGenes& genes, const SearchSpace& space, Rng& rng) {
  auto nodes = genes.nodes;
  auto& node = nodes[uniform_index(nodes.size(), rng)];
  const auto j = static_cast<int>(&node - nodes.data());
  if (uniform_index(2, rng) == 0) {
    // relabel
    std::vector<CellOp> others;
    for (CellOp op : kAllCellOps) {
      if (op != node.op) others.push_back(op);
    }
    node.op = others[uniform_index(others.size(), rng)];
  } else {
    // rewire: replace one input with a source the node does not read yet
    std::vector<int> candidates;
    for (int i = -1; i < j; ++i) {
      if (std::find(node.inputs.begin(), node.inputs.end(), i) == node.inputs.end()) candidates.push_back(i);
    }
    if (candidates.empty()) return std::nullopt;
    node.inputs[uniform_index(node.inputs.size(), rng)] = candidates[uniform_index(candidates.size(), rng)];
    std::sort(node.inputs.begin(), node.inputs.end());
  }
  Genotype out(CellGraphGenes{std::move(nodes)});
  if (!space.contains(out)) return std::nullopt;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- selection

std::size_t tournament_select(const Population& pop, int k, Rng& rng) {
  require_evaluated(pop.members);
  if (k < 1 || static_cast<std::size_t>(k) > pop.size()) {
    throw ConfigError("tournament size " + std::to_string(k) + " does not fit a population of " +
                      std::to_string(pop.size()));
  }
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t winner = 0;
  for (std::size_t draw = 0; draw < static_cast<std::size_t>(k); ++draw) {
    const auto pick = draw + uniform_index(idx.size() - draw, rng);
    std::swap(idx[draw], idx[pick]);
    if (draw == 0 || pop.members[idx[draw]].accuracy() > pop.members[winner].accuracy()) winner = idx[draw];
  }
  return winner;
}

std::size_t roulette_select(const Population& pop, Rng& rng) {
  require_evaluated(pop.members);
  if (pop.members.empty()) throw EvaluationOrderError("roulette on an empty population");
  std::int64_t total = 0;
  for (const auto& m : pop.members) total += m.accuracy().centi();
  if (total == 0) return uniform_index(pop.size(), rng);
  auto ticket = std::uniform_int_distribution<std::int64_t>(0, total - 1)(rng);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    ticket -= pop.members[i].accuracy().centi();
    if (ticket < 0) return i;
  }
  return pop.size() - 1;
}

// ---------------------------------------------------------------- variation

std::pair<Genotype, Genotype> crossover_fixed_binary(const Genotype& a, const Genotype& b, std::size_t cut) {
  auto ga = a.fixed_binary();
  auto gb = b.fixed_binary();
  if (ga.stage_nodes != gb.stage_nodes) throw SchemeError("FixedBinary parents have different stage layouts");
  cut = std::min(cut, ga.bits.size());
  for (std::size_t i = cut; i < ga.bits.size(); ++i) std::swap(ga.bits[i], gb.bits[i]);
  return {Genotype(std::move(ga)), Genotype(std::move(gb))};
}

std::pair<Genotype, Genotype> crossover_variable_blocks(const Genotype& a, const Genotype& b, std::size_t cut_a,
                                                        std::size_t cut_b) {
  const auto& ba = a.variable_blocks().blocks;
  const auto& bb = b.variable_blocks().blocks;
  cut_a = std::min(cut_a, ba.size());
  cut_b = std::min(cut_b, bb.size());
  VariableBlockGenes c1, c2;
  c1.blocks.assign(ba.begin(), ba.begin() + static_cast<std::ptrdiff_t>(cut_a));
  c1.blocks.insert(c1.blocks.end(), bb.begin() + static_cast<std::ptrdiff_t>(cut_b), bb.end());
  c2.blocks.assign(bb.begin(), bb.begin() + static_cast<std::ptrdiff_t>(cut_b));
  c2.blocks.insert(c2.blocks.end(), ba.begin() + static_cast<std::ptrdiff_t>(cut_a), ba.end());
  return {Genotype(std::move(c1)), Genotype(std::move(c2))};
}

std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, double p_c,
                                        const SearchSpace& space, Rng& rng) {
  if (a.scheme() != b.scheme()) throw SchemeError("crossover between different encodings");
  if (!bernoulli(p_c, rng)) return {a, b};
  switch (a.scheme()) {
    case Scheme::FixedBinary: {
      const auto n = a.fixed_binary().bits.size();
      if (n < 2) return {a, b};
      const auto cut = 1 + uniform_index(n - 1, rng);
      return crossover_fixed_binary(a, b, cut);
    }
    case Scheme::VariableBlocks: {
      const auto na = a.variable_blocks().blocks.size();
      const auto nb = b.variable_blocks().blocks.size();
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const auto cut_a = uniform_index(na + 1, rng);
        const auto cut_b = uniform_index(nb + 1, rng);
        auto children = crossover_variable_blocks(a, b, cut_a, cut_b);
        if (space.contains(children.first) && space.contains(children.second)) return children;
      }
      return {a, b};
    }
    case Scheme::CellGraph: {
      const auto& na = a.cell_graph().nodes;
      const auto& nb = b.cell_graph().nodes;
      const auto n = std::min(na.size(), nb.size());
      if (n < 2) return {a, b};
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const auto cut = 1 + uniform_index(n - 1, rng);
        CellGraphGenes c1, c2;
        c1.nodes.assign(na.begin(), na.begin() + static_cast<std::ptrdiff_t>(cut));
        c1.nodes.insert(c1.nodes.end(), nb.begin() + static_cast<std::ptrdiff_t>(cut), nb.end());
        c2.nodes.assign(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(cut));
        c2.nodes.insert(c2.nodes.end(), na.begin() + static_cast<std::ptrdiff_t>(cut), na.end());
        Genotype g1(std::move(c1)), g2(std::move(c2));
        if (space.contains(g1) && space.contains(g2)) return {std::move(g1), std::move(g2)};
      }
      return {a, b};
    }
  }
  return {a, b};
}

Genotype mutate(const Genotype& g, double p_m, const SearchSpace& space, Rng& rng) {
  switch (g.scheme()) {
    case Scheme::FixedBinary:
      return mutate_fixed_binary(g, p_m, rng);
    case Scheme::VariableBlocks:
    case Scheme::CellGraph: {
      if (!bernoulli(p_m, rng)) return g;
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        auto out = g.scheme() == Scheme::VariableBlocks ? try_mutate_blocks(g.variable_blocks(), space, rng)
                                                        : try_mutate_cell(g.cell_graph(), space, rng);
        if (out) return std::move(*out);
      }
      throw MutationStuckError("no valid mutation of " + canonical_serialize(g) + " after " +
                               std::to_string(kMaxAttempts) + " attempts");
    }
  }
  return g;
}

Genotype aging_mutant(const Genotype& parent, double p_m, const SearchSpace& space, Rng& rng) {
  const double p = parent.scheme() == Scheme::FixedBinary ? p_m : 1.0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto child = mutate(parent, p, space, rng);
    if (!(child == parent)) return child;
  }
  throw MutationStuckError("aging mutation keeps reproducing " + canonical_serialize(parent));
}

// ---------------------------------------------------------------- survival

Population environmental_select_elitist(const Population& parents, std::span<const Individual> offspring,
                                        std::size_t pop_size) {
  require_evaluated(parents.members);
  require_evaluated(offspring);
  std::vector<Individual> pool = parents.members;
  pool.insert(pool.end(), offspring.begin(), offspring.end());
  std::stable_sort(pool.begin(), pool.end(), ranks_before);
  if (pool.size() > pop_size) pool.resize(pop_size);
  return Population{parents.generation + 1, std::move(pool)};
}

std::size_t aging_sample(const Population& pop, int sample_size, Rng& rng) {
  if (sample_size < 1 || static_cast<std::size_t>(sample_size) > pop.size()) {
    throw ConfigError("aging sample size " + std::to_string(sample_size) + " exceeds population size " +
                      std::to_string(pop.size()));
  }
  return tournament_select(pop, sample_size, rng);
}

void aging_replace(Population& pop, Individual child) {
  pop.members.push_back(std::move(child));
  pop.members.erase(pop.members.begin());
}

void aging_step(Population& pop, int sample_size, double p_m, const SearchSpace& space, Rng& rng,
                const EvaluateFn& evaluate, const std::string& child_name) {
  const auto parent = aging_sample(pop, sample_size, rng);
  Individual child(child_name, aging_mutant(pop.members[parent].genotype(), p_m, space, rng), pop.generation);
  evaluate(child);
  if (!child.evaluated()) throw EvaluationOrderError("aging child " + child_name + " was not evaluated");
  aging_replace(pop, std::move(child));
}

// ---------------------------------------------------------------- multi-objective

namespace {

using ObjectiveVec = std::array<double, 2>;

ObjectiveVec minimized(const Individual& m) {
  const auto& f = m.fitness();
  return {-static_cast<double>(f.accuracy.centi()), static_cast<double>(f.params)};
}

bool dominates(const ObjectiveVec& a, const ObjectiveVec& b) {
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strictly = true;
  }
  return strictly;
}

}  // namespace

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Individual> members) {
  require_evaluated(members);
  const auto n = members.size();
  std::vector<ObjectiveVec> obj(n);
  for (std::size_t i = 0; i < n; ++i) obj[i] = minimized(members[i]);

  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<std::size_t> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(obj[i], obj[j])) dominated_by[i].push_back(j);
      else if (dominates(obj[j], obj[i])) ++domination_count[i];
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (domination_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (auto i : current) {
      for (auto j : dominated_by[i]) {
        if (--domination_count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const Individual> members, std::span<const std::size_t> front) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto value = [&](std::size_t pos) { return minimized(members[front[pos]])[k]; };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto va = value(a), vb = value(b);
      if (va != vb) return va < vb;
      return members[front[a]].name() < members[front[b]].name();
    });
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = value(order.back()) - value(order.front());
    if (range <= 0.0) continue;
    for (std::size_t r = 1; r + 1 < n; ++r) {
      distance[order[r]] += (value(order[r + 1]) - value(order[r - 1])) / range;
    }
  }
  return distance;
}

Population crowding_select(const Population& parents, std::span<const Individual> offspring,
                           std::size_t capacity) {
  std::vector<Individual> pool = parents.members;
  pool.insert(pool.end(), offspring.begin(), offspring.end());
  const auto fronts = nondominated_sort(pool);

  Population next{parents.generation + 1, {}};
  for (const auto& front : fronts) {
    if (next.size() >= capacity) break;
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    if (next.size() + front.size() <= capacity) {
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return pool[front[a]].name() < pool[front[b]].name(); });
    } else {
      const auto distance = crowding_distance(pool, front);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (distance[a] != distance[b]) return distance[a] > distance[b];
        return pool[front[a]].name() < pool[front[b]].name();
      });
      order.resize(capacity - next.size());
    }
    for (auto pos : order) next.members.push_back(pool[front[pos]]);
  }
  return next;
}

}  // namespace enasfarm
