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

#include <vector>

#include "enasfarm/arch_ir.hpp"
#include "enasfarm/decode.hpp"
#include "enasfarm/genotype.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

/// The configured region of genotype space a strategy searches, plus the
/// data shape the architectures are built for.
struct SearchSpace {
  Scheme scheme = Scheme::FixedBinary;

  // FixedBinary
  std::vector<int> stage_nodes{4, 4, 4};

  // VariableBlocks
  int min_blocks = 2;
  int max_blocks = 8;
  std::vector<int> channel_choices{32, 64, 128, 256};
  int max_amount = 3;

  // CellGraph
  int min_nodes = 2;
  int max_nodes = 5;

  TensorShape input{3, 32, 32};
  int classes = 10;
  DecodeOptions decode;

  /// Largest number of 2x2/2 pools the input survives.
  int max_pools() const;

  /// Throws ConfigError when no genotype can satisfy the bounds.
  void check() const;

  /// Structural invariants plus this space's bounds; throws InvariantViolation.
  void validate(const Genotype& g) const;
  bool contains(const Genotype& g) const;

  /// Uniform draw from the configured space.
  Genotype sample(Rng& rng) const;
  BlockGene sample_unit(Rng& rng) const;

  bool operator==(const SearchSpace&) const = default;
};

}  // namespace enasfarm
