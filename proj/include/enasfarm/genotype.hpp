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

#include <compare>
#include <functional>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace enasfarm {

enum class Scheme { FixedBinary, VariableBlocks, CellGraph };

std::string_view scheme_name(Scheme scheme);
Scheme scheme_from_name(std::string_view name);

/// Stage-partitioned connection bits. Within a stage of K nodes the bits are
/// ordered (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ... i.e. for each target
/// node j, one bit per earlier node i < j.
struct FixedBinaryGenes {
  std::vector<int> stage_nodes;
  std::vector<std::uint8_t> bits;

  static std::size_t bits_for_stage(int nodes) {
    return static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes - 1) / 2;
  }
  static std::size_t bits_for(const std::vector<int>& stage_nodes);

  bool operator==(const FixedBinaryGenes&) const = default;
};

enum class BlockKind { ResUnit, DenseUnit, Pool };
enum class PoolType { Max, Mean };

struct BlockGene {
  BlockKind kind = BlockKind::ResUnit;
  int out_channels = 0;  // ignored for Pool
  PoolType pool_type = PoolType::Max;  // Pool only
  int amount = 1;  // always 1 for Pool

  static BlockGene res(int channels, int amount = 1) { return {BlockKind::ResUnit, channels, PoolType::Max, amount}; }
  static BlockGene dense(int growth, int amount = 1) { return {BlockKind::DenseUnit, growth, PoolType::Max, amount}; }
  static BlockGene pool(PoolType type) { return {BlockKind::Pool, 0, type, 1}; }

  bool operator==(const BlockGene&) const = default;
};

struct VariableBlockGenes {
  std::vector<BlockGene> blocks;
  std::size_t pool_count() const;
  bool operator==(const VariableBlockGenes&) const = default;
};

enum class CellOp { Conv3x3, Conv1x1, MaxPool3x3, Identity };
inline constexpr CellOp kAllCellOps[] = {CellOp::Conv3x3, CellOp::Conv1x1, CellOp::MaxPool3x3,
                                         CellOp::Identity};

/// One node of a cell. `inputs` are strictly increasing indices of earlier
/// nodes, with -1 standing for the cell input. The last node is the output.
struct CellNode {
  CellOp op = CellOp::Conv3x3;
  std::vector<int> inputs;
  bool operator==(const CellNode&) const = default;
};

struct CellGraphGenes {
  std::vector<CellNode> nodes;
  bool operator==(const CellGraphGenes&) const = default;
};

/// An encoding-tagged architecture representation.
class Genotype {
 public:
  using Payload = std::variant<FixedBinaryGenes, VariableBlockGenes, CellGraphGenes>;

  Genotype() : payload_(FixedBinaryGenes{}) {}
  Genotype(FixedBinaryGenes genes) : payload_(std::move(genes)) {}      // NOLINT
  Genotype(VariableBlockGenes genes) : payload_(std::move(genes)) {}    // NOLINT
  Genotype(CellGraphGenes genes) : payload_(std::move(genes)) {}        // NOLINT

  Scheme scheme() const { return static_cast<Scheme>(payload_.index()); }
  const Payload& payload() const { return payload_; }

  const FixedBinaryGenes& fixed_binary() const { return std::get<FixedBinaryGenes>(payload_); }
  const VariableBlockGenes& variable_blocks() const { return std::get<VariableBlockGenes>(payload_); }
  const CellGraphGenes& cell_graph() const { return std::get<CellGraphGenes>(payload_); }

  bool operator==(const Genotype&) const = default;

 private:
  Payload payload_;
};

/// Throws InvariantViolation if the genotype breaks a structural invariant of
/// its scheme (bit count per stage, at least one non-pooling block, acyclic
/// single-output cell). Search-space bounds are checked by SearchSpace.
void validate_structure(const Genotype& g);

/// Canonical byte form: scheme tag first, payload fields in declaration
/// order, decimal integers, ':' between fields. Examples:
///   "FB:3:011"                 one stage of 3 nodes
///   "VB:R:64:1|D:32:2|P:max"   blocks separated by '|'
///   "CG:c3:-1|c1:0|id:-1,1"    nodes separated by '|', inputs by ','
std::string canonical_serialize(const Genotype& g);

/// Inverse of canonical_serialize. Throws ParseError or InvariantViolation.
Genotype parse_genotype(std::string_view text);

/// Lowercase SHA-224 hex of the canonical serialization.
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string hex);

  const std::string& hex() const { return hex_; }
  bool empty() const { return hex_.empty(); }

  auto operator<=>(const Identifier&) const = default;

 private:
  std::string hex_;
};

Identifier identifier(const Genotype& g);

bool is_identifier_hex(std::string_view text);

}  // namespace enasfarm

template <>
struct std::hash<enasfarm::Identifier> {
  std::size_t operator()(const enasfarm::Identifier& id) const noexcept {
    return std::hash<std::string>{}(id.hex());
  }
};
