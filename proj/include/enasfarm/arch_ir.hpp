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
#include <string>
#include <variant>
#include <vector>

#include "enasfarm/genotype.hpp"

namespace enasfarm {

struct TensorShape {
  std::int64_t channels = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;

  std::int64_t elements() const { return channels * height * width; }
  bool operator==(const TensorShape&) const = default;
};

/// 'same' padding: output spatial size is ceil(in / stride).
struct ConvLayer {
  int kernel = 3;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  int stride = 1;
  bool bias = true;
  bool operator==(const ConvLayer&) const = default;
};

/// Output spatial size is floor(in / stride).
struct PoolLayer {
  PoolType kind = PoolType::Max;
  int kernel = 2;
  int stride = 2;
  bool operator==(const PoolLayer&) const = default;
};

/// Flattens its input; n_in must equal C*H*W of the source tensor.
struct DenseLayer {
  std::int64_t n_in = 0;
  std::int64_t n_out = 0;
  bool bias = true;
  bool operator==(const DenseLayer&) const = default;
};

enum class MergeMode { Add, Concat };

/// Parameter-free merge of tensor `from` into the layer's source tensor.
/// Add requires equal spatial size; a narrower operand is zero-padded in the
/// channel dimension. Concat stacks channels.
struct SkipLayer {
  int from = 0;
  MergeMode mode = MergeMode::Add;
  bool operator==(const SkipLayer&) const = default;
};

/// Tensor positions: 0 is the network input, i + 1 is the output of
/// layers[i]. Every layer reads position `src`, which must be <= its own
/// index (topological order).
struct Layer {
  int src = 0;
  std::variant<ConvLayer, PoolLayer, DenseLayer, SkipLayer> op;
  bool operator==(const Layer&) const = default;
};

struct ArchIR {
  TensorShape input;
  std::vector<Layer> layers;

  /// Appends a layer reading `src` and returns the new tensor position.
  int add(int src, decltype(Layer::op) op) {
    layers.push_back(Layer{src, std::move(op)});
    return static_cast<int>(layers.size());
  }
  bool operator==(const ArchIR&) const = default;
};

/// Shape of every tensor position (size layers+1). Throws InvariantViolation
/// when a layer's declared input does not match its source.
std::vector<TensorShape> infer_shapes(const ArchIR& ir);

std::int64_t param_count(const ArchIR& ir);
/// Multiply-accumulate count.
std::int64_t flop_count(const ArchIR& ir);
std::int64_t conv_depth(const ArchIR& ir);

struct ArchStats {
  std::int64_t depth = 0;
  std::int64_t params = 0;
  std::int64_t flops = 0;
};
ArchStats arch_stats(const ArchIR& ir);

/// Human-readable one-layer-per-line listing; used as the job "script".
std::string describe(const ArchIR& ir);

}  // namespace enasfarm
