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

#include "enasfarm/search_space.hpp"

#include <algorithm>

#include "enasfarm/errors.hpp"

namespace enasfarm {

namespace {

template <class T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

int uniform_int(int lo, int hi, Rng& rng) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool coin(Rng& rng) { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; }

}  // namespace

int SearchSpace::max_pools() const {
  auto side = std::min(input.height, input.width);
  int pools = 0;
  while (side / 2 >= 1) {
    side /= 2;
    ++pools;
  }
  return pools;
}

void SearchSpace::check() const {
  if (input.channels <= 0 || input.height <= 0 || input.width <= 0) throw ConfigError("input shape must be positive");
  if (classes <= 0) throw ConfigError("classes must be positive");
  switch (scheme) {
    case Scheme::FixedBinary:
      if (stage_nodes.empty()) throw ConfigError("stage_nodes must not be empty");
      for (int k : stage_nodes) {
        if (k < 1) throw ConfigError("every stage needs at least one node");
      }
      if (static_cast<int>(stage_nodes.size()) - 1 > max_pools()) {
        throw ConfigError("too many stages for the input size");
      }
      for (int c : decode.stage_channels) {
        if (c <= 0) throw ConfigError("stage_channels must be positive");
      }
      break;
    case Scheme::VariableBlocks:
      if (min_blocks < 1 || max_blocks < min_blocks) {
        throw ConfigError("block length bounds must satisfy 1 <= min_blocks <= max_blocks");
      }
      if (channel_choices.empty()) throw ConfigError("channel_choices must not be empty");
      for (int c : channel_choices) {
        if (c <= 0) throw ConfigError("channel_choices must be positive");
      }
      if (max_amount < 1) throw ConfigError("max_amount must be at least 1");
      break;
    case Scheme::CellGraph:
      if (min_nodes < 1 || max_nodes < min_nodes) {
        throw ConfigError("node bounds must satisfy 1 <= min_nodes <= max_nodes");
      }
      if (decode.cell_channels <= 0 || decode.cell_repeats < 1) {
        throw ConfigError("cell_channels and cell_repeats must be positive");
      }
      if (decode.cell_repeats - 1 > max_pools()) throw ConfigError("too many cell repeats for the input size");
      break;
  }
}

void SearchSpace::validate(const Genotype& g) const {
  validate_structure(g);
  if (g.scheme() != scheme) throw InvariantViolation("genotype scheme does not match the search space");
  switch (scheme) {
    case Scheme::FixedBinary:
      if (g.fixed_binary().stage_nodes != stage_nodes) {
        throw InvariantViolation("FixedBinary stage sizes differ from the configured stages");
      }
      break;
    case Scheme::VariableBlocks: {
      const auto& genes = g.variable_blocks();
      const auto n = static_cast<int>(genes.blocks.size());
      if (n < min_blocks || n > max_blocks) {
        throw InvariantViolation("block list length " + std::to_string(n) + " outside [" +
                                 std::to_string(min_blocks) + ", " + std::to_string(max_blocks) + "]");
      }
      if (static_cast<int>(genes.pool_count()) > max_pools()) {
        throw InvariantViolation("too many pooling blocks for the input size");
      }
      for (const auto& b : genes.blocks) {
        if (b.kind == BlockKind::Pool) continue;
        if (std::find(channel_choices.begin(), channel_choices.end(), b.out_channels) == channel_choices.end()) {
          throw InvariantViolation("block channels " + std::to_string(b.out_channels) + " not in channel_choices");
        }
        if (b.amount > max_amount) throw InvariantViolation("block amount above max_amount");
      }
      break;
    }
    case Scheme::CellGraph: {
      const auto n = static_cast<int>(g.cell_graph().nodes.size());
      if (n < min_nodes || n > max_nodes) throw InvariantViolation("cell node count outside bounds");
      break;
    }
  }
}

bool SearchSpace::contains(const Genotype& g) const {
  try {
    validate(g);
    return true;
  } catch (const InvariantViolation&) {
    return false;
  }
}

BlockGene SearchSpace::sample_unit(Rng& rng) const {
  const int channels = pick(channel_choices, rng);
  const int amount = uniform_int(1, max_amount, rng);
  return coin(rng) ? BlockGene::res(channels, amount) : BlockGene::dense(channels, amount);
}

Genotype SearchSpace::sample(Rng& rng) const {
  check();
  switch (scheme) {
    case Scheme::FixedBinary: {
      FixedBinaryGenes genes;
      genes.stage_nodes = stage_nodes;
      genes.bits.resize(FixedBinaryGenes::bits_for(stage_nodes));
      for (auto& b : genes.bits) b = coin(rng) ? 1 : 0;
      return genes;
    }
    case Scheme::VariableBlocks: {
      const int length = uniform_int(min_blocks, max_blocks, rng);
      const int pool_budget = max_pools();
      VariableBlockGenes genes;
      int pools = 0;
      bool has_unit = false;
      for (int i = 0; i < length; ++i) {
        const bool last = i + 1 == length;
        const bool want_pool = uniform_int(0, 3, rng) == 0;
        if (want_pool && pools < pool_budget && !(last && !has_unit)) {
          genes.blocks.push_back(BlockGene::pool(coin(rng) ? PoolType::Max : PoolType::Mean));
          ++pools;
        } else {
          genes.blocks.push_back(sample_unit(rng));
          has_unit = true;
        }
      }
      return genes;
    }
    case Scheme::CellGraph: {
      const int n = uniform_int(min_nodes, max_nodes, rng);
      CellGraphGenes genes;
      std::vector<bool> consumed(static_cast<std::size_t>(n), false);
      for (int j = 0; j < n; ++j) {
        CellNode node;
        node.op = pick(std::vector<CellOp>(std::begin(kAllCellOps), std::end(kAllCellOps)), rng);
        const int forced = uniform_int(-1, j - 1, rng);
        for (int i = -1; i < j; ++i) {
          if (i == forced || coin(rng)) {
            node.inputs.push_back(i);
            if (i >= 0) consumed[static_cast<std::size_t>(i)] = true;
          }
        }
        genes.nodes.push_back(std::move(node));
      }
      auto& out = genes.nodes.back().inputs;
      for (int j = 0; j + 1 < n; ++j) {
        if (!consumed[static_cast<std::size_t>(j)]) out.push_back(j);
      }
      std::sort(out.begin(), out.end());
      return genes;
    }
  }
  throw ConfigError("unknown scheme");
}

}  // namespace enasfarm
