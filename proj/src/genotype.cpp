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

#include "enasfarm/genotype.hpp"

#include <algorithm>
#include <numeric>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace {

std::string_view cell_op_code(CellOp op) {
  switch (op) {
    case CellOp::Conv3x3: return "c3";
    case CellOp::Conv1x1: return "c1";
    case CellOp::MaxPool3x3: return "mp3";
    case CellOp::Identity: return "id";
  }
  return "?";
}

CellOp cell_op_from_code(std::string_view code) {
  for (CellOp op : kAllCellOps) {
    if (cell_op_code(op) == code) return op;
  }
  throw ParseError("unknown cell op '" + std::string(code) + "'");
}

int positive_field(std::string_view text, std::string_view what) {
  const auto v = parse_int(text);
  if (!v || *v <= 0 || *v > 1'000'000) {
    throw ParseError("bad " + std::string(what) + " field '" + std::string(text) + "'");
  }
  return static_cast<int>(*v);
}

void validate_fixed_binary(const FixedBinaryGenes& genes) {
  if (genes.stage_nodes.empty()) throw InvariantViolation("FixedBinary genotype has no stages");
  for (int k : genes.stage_nodes) {
    if (k < 1) throw InvariantViolation("FixedBinary stage needs at least one node");
  }
  const auto expected = FixedBinaryGenes::bits_for(genes.stage_nodes);
  if (genes.bits.size() != expected) {
    throw InvariantViolation("FixedBinary payload has " + std::to_string(genes.bits.size()) +
                             " bits, stage sizes require " + std::to_string(expected));
  }
  for (auto b : genes.bits) {
    if (b > 1) throw InvariantViolation("FixedBinary bit outside {0,1}");
  }
}

void validate_variable_blocks(const VariableBlockGenes& genes) {
  if (genes.blocks.empty()) throw InvariantViolation("VariableBlocks genotype is empty");
  bool has_unit = false;
  for (const auto& b : genes.blocks) {
    if (b.kind == BlockKind::Pool) {
      if (b.amount != 1) throw InvariantViolation("Pool block amount must be 1");
      if (b.out_channels != 0) throw InvariantViolation("Pool block carries no channels");
      continue;
    }
    has_unit = true;
    if (b.out_channels <= 0) throw InvariantViolation("block channels must be positive");
    if (b.amount <= 0) throw InvariantViolation("block amount must be positive");
  }
  if (!has_unit) throw InvariantViolation("VariableBlocks genotype has no non-pooling block");
}

void validate_cell_graph(const CellGraphGenes& genes) {
  const auto& nodes = genes.nodes;
  if (nodes.empty()) throw InvariantViolation("CellGraph genotype has no nodes");
  std::vector<bool> consumed(nodes.size(), false);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto& in = nodes[j].inputs;
    if (in.empty()) throw InvariantViolation("cell node " + std::to_string(j) + " has no inputs");
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k] < -1 || in[k] >= static_cast<int>(j)) {
        throw InvariantViolation("cell node " + std::to_string(j) + " reads a later node (cycle)");
      }
      if (k > 0 && in[k] <= in[k - 1]) {
        throw InvariantViolation("cell node inputs must be strictly increasing");
      }
      if (in[k] >= 0) consumed[static_cast<std::size_t>(in[k])] = true;
    }
  }
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    if (!consumed[j]) {
      throw InvariantViolation("cell node " + std::to_string(j) + " is a second output");
    }
  }
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::FixedBinary: return "fixed_binary";
    case Scheme::VariableBlocks: return "variable_blocks";
    case Scheme::CellGraph: return "cell_graph";
  }
  return "?";
}

Scheme scheme_from_name(std::string_view name) {
  for (Scheme s : {Scheme::FixedBinary, Scheme::VariableBlocks, Scheme::CellGraph}) {
    if (scheme_name(s) == name) return s;
  }
  throw ConfigError("unknown encoding '" + std::string(name) + "'");
}

std::size_t FixedBinaryGenes::bits_for(const std::vector<int>& stage_nodes) {
  std::size_t total = 0;
  for (int k : stage_nodes) total += bits_for_stage(k);
  return total;
}

std::size_t VariableBlockGenes::pool_count() const {
  return static_cast<std::size_t>(std::count_if(
      blocks.begin(), blocks.end(), [](const BlockGene& b) { return b.kind == BlockKind::Pool; }));
}

void validate_structure(const Genotype& g) {
  std::visit(
      [](const auto& genes) {
        using T = std::decay_t<decltype(genes)>;
        if constexpr (std::is_same_v<T, FixedBinaryGenes>) validate_fixed_binary(genes);
        if constexpr (std::is_same_v<T, VariableBlockGenes>) validate_variable_blocks(genes);
        if constexpr (std::is_same_v<T, CellGraphGenes>) validate_cell_graph(genes);
      },
      g.payload());
}

std::string canonical_serialize(const Genotype& g) {
  validate_structure(g);
  std::string out;
  switch (g.scheme()) {
    case Scheme::FixedBinary: {
      const auto& genes = g.fixed_binary();
      out = "FB";
      std::size_t offset = 0;
      for (int k : genes.stage_nodes) {
        out += ':';
        out += std::to_string(k);
        out += ':';
        const auto n = FixedBinaryGenes::bits_for_stage(k);
        for (std::size_t i = 0; i < n; ++i) out += genes.bits[offset + i] ? '1' : '0';
        offset += n;
      }
      break;
    }
    case Scheme::VariableBlocks: {
      out = "VB:";
      bool first = true;
      for (const auto& b : g.variable_blocks().blocks) {
        if (!first) out += '|';
        first = false;
        switch (b.kind) {
          case BlockKind::ResUnit:
          case BlockKind::DenseUnit:
            out += b.kind == BlockKind::ResUnit ? "R:" : "D:";
            out += std::to_string(b.out_channels) + ':' + std::to_string(b.amount);
            break;
          case BlockKind::Pool:
            out += b.pool_type == PoolType::Max ? "P:max" : "P:mean";
            break;
        }
      }
      break;
    }
    case Scheme::CellGraph: {
      out = "CG:";
      bool first = true;
      for (const auto& node : g.cell_graph().nodes) {
        if (!first) out += '|';
        first = false;
        out += cell_op_code(node.op);
        out += ':';
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
          if (k > 0) out += ',';
          out += std::to_string(node.inputs[k]);
        }
      }
      break;
    }
  }
  return out;
}

Genotype parse_genotype(std::string_view text) {
  const auto bad = [&](const std::string& why) {
    return ParseError("cannot parse genotype '" + std::string(text) + "': " + why);
  };
  if (starts_with(text, "FB:")) {
    const auto fields = split(text.substr(3), ':');
    if (fields.size() % 2 != 0) throw bad("expected <nodes>:<bits> pairs");
    FixedBinaryGenes genes;
    for (std::size_t i = 0; i < fields.size(); i += 2) {
      const int k = positive_field(fields[i], "stage size");
      if (fields[i + 1].size() != FixedBinaryGenes::bits_for_stage(k)) throw bad("bit count mismatch");
      genes.stage_nodes.push_back(k);
      for (char c : fields[i + 1]) {
        if (c != '0' && c != '1') throw bad("bits must be 0 or 1");
        genes.bits.push_back(static_cast<std::uint8_t>(c - '0'));
      }
    }
    Genotype g(std::move(genes));
    validate_structure(g);
    return g;
  }
  if (starts_with(text, "VB:")) {
    VariableBlockGenes genes;
    for (const auto& block : split(text.substr(3), '|')) {
      const auto f = split(block, ':');
      if (f.size() == 2 && f[0] == "P") {
        if (f[1] == "max") genes.blocks.push_back(BlockGene::pool(PoolType::Max));
        else if (f[1] == "mean") genes.blocks.push_back(BlockGene::pool(PoolType::Mean));
        else throw bad("unknown pool type '" + f[1] + "'");
      } else if (f.size() == 3 && (f[0] == "R" || f[0] == "D")) {
        const int c = positive_field(f[1], "channels");
        const int a = positive_field(f[2], "amount");
        genes.blocks.push_back(f[0] == "R" ? BlockGene::res(c, a) : BlockGene::dense(c, a));
      } else {
        throw bad("unknown block '" + block + "'");
      }
    }
    Genotype g(std::move(genes));
    validate_structure(g);
    return g;
  }
  if (starts_with(text, "CG:")) {
    CellGraphGenes genes;
    for (const auto& node_text : split(text.substr(3), '|')) {
      const auto f = split(node_text, ':');
      if (f.size() != 2) throw bad("node needs <op>:<inputs>");
      CellNode node;
      node.op = cell_op_from_code(f[0]);
      for (const auto& in : split(f[1], ',')) {
        const auto v = parse_int(in);
        if (!v) throw bad("bad node input '" + in + "'");
        node.inputs.push_back(static_cast<int>(*v));
      }
      genes.nodes.push_back(std::move(node));
    }
    Genotype g(std::move(genes));
    validate_structure(g);
    return g;
  }
  throw bad("unknown scheme tag");
}

bool is_identifier_hex(std::string_view text) {
  return text.size() == 56 && std::all_of(text.begin(), text.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

Identifier::Identifier(std::string hex) : hex_(std::move(hex)) {
  if (!is_identifier_hex(hex_)) throw ParseError("not a 56-digit lowercase hex identifier: '" + hex_ + "'");
}

Identifier identifier(const Genotype& g) { return Identifier(sha224_hex(canonical_serialize(g))); }

}  // namespace enasfarm
