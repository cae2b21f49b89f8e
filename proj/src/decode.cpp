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

#include "enasfarm/decode.hpp"

#include <algorithm>

#include "enasfarm/errors.hpp"

namespace enasfarm {

namespace {

/// Builds an ArchIR while tracking the shape of every tensor position.
class Builder {
 public:
  explicit Builder(const TensorShape& input) {
    ir_.input = input;
    shapes_.push_back(input);
  }

  const TensorShape& shape(int pos) const { return shapes_[static_cast<std::size_t>(pos)]; }

  int conv(int src, int kernel, std::int64_t c_out) {
    const auto& in = shape(src);
    return push(src, ConvLayer{kernel, in.channels, c_out, 1, true}, {c_out, in.height, in.width});
  }

  int pool(int src, PoolType kind, int kernel, int stride) {
    const auto& in = shape(src);
    const TensorShape out{in.channels, in.height / stride, in.width / stride};
    if (out.height < 1 || out.width < 1) {
      throw DecodeError("pooling collapses a " + std::to_string(in.height) + "x" + std::to_string(in.width) +
                        " feature map below 1x1");
    }
    return push(src, PoolLayer{kind, kernel, stride}, out);
  }

  int merge(int src, int from, MergeMode mode) {
    const auto& a = shape(src);
    const auto& b = shape(from);
    const auto channels = mode == MergeMode::Add ? std::max(a.channels, b.channels) : a.channels + b.channels;
    return push(src, SkipLayer{from, mode}, {channels, a.height, a.width});
  }

  /// Sum of the given positions (a single position is returned unchanged).
  int sum(const std::vector<int>& positions) {
    int acc = positions.front();
    for (std::size_t k = 1; k < positions.size(); ++k) acc = merge(acc, positions[k], MergeMode::Add);
    return acc;
  }

  ArchIR finish(int src, int head_classes) {
    const auto n_in = shape(src).elements();
    push(src, DenseLayer{n_in, head_classes, true}, {head_classes, 1, 1});
    return std::move(ir_);
  }

 private:
  int push(int src, decltype(Layer::op) op, const TensorShape& out) {
    shapes_.push_back(out);
    return ir_.add(src, std::move(op));
  }

  ArchIR ir_;
  std::vector<TensorShape> shapes_;
};

int fixed_binary_stages(Builder& b, const FixedBinaryGenes& genes, const DecodeOptions& options) {
  int cur = 0;
  std::size_t offset = 0;
  const auto stages = genes.stage_nodes.size();
  for (std::size_t s = 0; s < stages; ++s) {
    const int k = genes.stage_nodes[s];
    const int channels = options.stage_channels.empty()
                             ? 64
                             : options.stage_channels[std::min(s, options.stage_channels.size() - 1)];
    const auto bit = [&](int i, int j) {
      // Bits for target j start after the j*(j-1)/2 bits of earlier targets.
      return genes.bits[offset + static_cast<std::size_t>(j * (j - 1) / 2 + i)] != 0;
    };
    std::vector<int> out(static_cast<std::size_t>(k));
    std::vector<bool> has_successor(static_cast<std::size_t>(k), false);
    for (int j = 0; j < k; ++j) {
      std::vector<int> preds;
      for (int i = 0; i < j; ++i) {
        if (bit(i, j)) {
          preds.push_back(out[static_cast<std::size_t>(i)]);
          has_successor[static_cast<std::size_t>(i)] = true;
        }
      }
      const int in = preds.empty() ? cur : b.sum(preds);
      out[static_cast<std::size_t>(j)] = b.conv(in, 3, channels);
    }
    std::vector<int> sinks;
    for (int j = 0; j < k; ++j) {
      if (!has_successor[static_cast<std::size_t>(j)]) sinks.push_back(out[static_cast<std::size_t>(j)]);
    }
    cur = b.sum(sinks);
    offset += FixedBinaryGenes::bits_for_stage(k);
    if (s + 1 < stages) cur = b.pool(cur, PoolType::Max, 2, 2);
  }
  return cur;
}

int variable_blocks(Builder& b, const VariableBlockGenes& genes) {
  int cur = 0;
  for (const auto& block : genes.blocks) {
    switch (block.kind) {
      case BlockKind::ResUnit:
        for (int r = 0; r < block.amount; ++r) {
          const int in = cur;
          const int c1 = b.conv(in, 3, block.out_channels);
          const int c2 = b.conv(c1, 3, block.out_channels);
          cur = b.merge(c2, in, MergeMode::Add);
        }
        break;
      case BlockKind::DenseUnit:
        for (int r = 0; r < block.amount; ++r) {
          const int in = cur;
          const int c = b.conv(in, 3, block.out_channels);
          cur = b.merge(c, in, MergeMode::Concat);
        }
        break;
      case BlockKind::Pool:
        cur = b.pool(cur, block.pool_type, 2, 2);
        break;
    }
  }
  return cur;
}

int cell_graph(Builder& b, const CellGraphGenes& genes, const DecodeOptions& options) {
  int cur = b.conv(0, 3, options.cell_channels);
  for (int r = 0; r < options.cell_repeats; ++r) {
    const int cell_in = cur;
    std::vector<int> out(genes.nodes.size());
    for (std::size_t j = 0; j < genes.nodes.size(); ++j) {
      const auto& node = genes.nodes[j];
      std::vector<int> inputs;
      for (int i : node.inputs) inputs.push_back(i < 0 ? cell_in : out[static_cast<std::size_t>(i)]);
      const int in = b.sum(inputs);
      switch (node.op) {
        case CellOp::Conv3x3: out[j] = b.conv(in, 3, options.cell_channels); break;
        case CellOp::Conv1x1: out[j] = b.conv(in, 1, options.cell_channels); break;
        case CellOp::MaxPool3x3: out[j] = b.pool(in, PoolType::Max, 3, 1); break;
        case CellOp::Identity: out[j] = in; break;
      }
    }
    cur = out.back();
    if (r + 1 < options.cell_repeats) cur = b.pool(cur, PoolType::Max, 2, 2);
  }
  return cur;
}

}  // namespace

ArchIR decode(const Genotype& g, const TensorShape& input, int head_classes, const DecodeOptions& options) {
  validate_structure(g);
  if (input.channels <= 0 || input.height <= 0 || input.width <= 0) {
    throw DecodeError("input shape must be positive");
  }
  if (head_classes <= 0) throw DecodeError("head_classes must be positive");
  Builder b(input);
  int out = 0;
  switch (g.scheme()) {
    case Scheme::FixedBinary: out = fixed_binary_stages(b, g.fixed_binary(), options); break;
    case Scheme::VariableBlocks: out = variable_blocks(b, g.variable_blocks()); break;
    case Scheme::CellGraph: out = cell_graph(b, g.cell_graph(), options); break;
  }
  return b.finish(out, head_classes);
}

}  // namespace enasfarm
