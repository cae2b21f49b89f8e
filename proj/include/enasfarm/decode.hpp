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
#include "enasfarm/genotype.hpp"

namespace enasfarm {

/// Per-run constants that turn a genotype into layers. They are not part of
/// the genotype, so they must stay fixed for a run directory.
struct DecodeOptions {
  /// Output channels of every node in FixedBinary stage s; the last entry is
  /// reused when there are more stages than entries.
  std::vector<int> stage_channels{64, 128, 256};
  int cell_channels = 32;
  int cell_repeats = 3;

  bool operator==(const DecodeOptions&) const = default;
};

/// Expands `g` into an ArchIR ending in Dense(., head_classes).
///
/// FixedBinary: each stage node is a 3x3 conv; bit (i,j) routes node i into
/// node j, nodes without predecessors read the stage input, and nodes without
/// successors are summed into the stage output. Stages are separated by a
/// 2x2/2 max pool.
/// VariableBlocks: ResUnit = two 3x3 convs plus an identity skip; DenseUnit =
/// one 3x3 conv concatenated with its input; Pool = 2x2/2.
/// CellGraph: a 3x3 stem conv, then `cell_repeats` copies of the cell with a
/// 2x2/2 max pool between copies.
///
/// Throws DecodeError when pooling would shrink the feature map below 1x1.
ArchIR decode(const Genotype& g, const TensorShape& input, int head_classes,
              const DecodeOptions& options = {});

}  // namespace enasfarm
