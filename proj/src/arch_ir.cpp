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

#include "enasfarm/arch_ir.hpp"

#include <algorithm>
#include <sstream>

#include "enasfarm/errors.hpp"

namespace enasfarm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

[[noreturn]] void shape_error(std::size_t index, const std::string& why) {
  throw InvariantViolation("layer " + std::to_string(index) + ": " + why);
}

}  // namespace

std::vector<TensorShape> infer_shapes(const ArchIR& ir) {
  if (ir.input.channels <= 0 || ir.input.height <= 0 || ir.input.width <= 0) {
    throw InvariantViolation("input shape must be positive");
  }
  std::vector<TensorShape> shapes{ir.input};
  shapes.reserve(ir.layers.size() + 1);
  for (std::size_t i = 0; i < ir.layers.size(); ++i) {
    const auto& layer = ir.layers[i];
    if (layer.src < 0 || static_cast<std::size_t>(layer.src) > i) shape_error(i, "source out of order");
    const TensorShape in = shapes[static_cast<std::size_t>(layer.src)];
    TensorShape out = std::visit(
        overloaded{
            [&](const ConvLayer& c) {
              if (c.kernel <= 0 || c.stride <= 0 || c.c_out <= 0) shape_error(i, "conv geometry");
              if (c.c_in != in.channels) {
                shape_error(i, "conv expects " + std::to_string(c.c_in) + " channels, source has " +
                                   std::to_string(in.channels));
              }
              return TensorShape{c.c_out, ceil_div(in.height, c.stride), ceil_div(in.width, c.stride)};
            },
            [&](const PoolLayer& p) {
              if (p.kernel <= 0 || p.stride <= 0) shape_error(i, "pool geometry");
              return TensorShape{in.channels, in.height / p.stride, in.width / p.stride};
            },
            [&](const DenseLayer& d) {
              if (d.n_in != in.elements()) {
                shape_error(i, "dense expects " + std::to_string(d.n_in) + " inputs, source has " +
                                   std::to_string(in.elements()));
              }
              if (d.n_out <= 0) shape_error(i, "dense width");
              return TensorShape{d.n_out, 1, 1};
            },
            [&](const SkipLayer& s) {
              if (s.from < 0 || static_cast<std::size_t>(s.from) > i) shape_error(i, "skip source out of order");
              const TensorShape other = shapes[static_cast<std::size_t>(s.from)];
              if (other.height != in.height || other.width != in.width) shape_error(i, "skip spatial mismatch");
              const auto channels = s.mode == MergeMode::Add ? std::max(in.channels, other.channels)
                                                             : in.channels + other.channels;
              return TensorShape{channels, in.height, in.width};
            },
        },
        layer.op);
    if (out.channels <= 0 || out.height <= 0 || out.width <= 0) shape_error(i, "non-positive output shape");
    shapes.push_back(out);
  }
  return shapes;
}

std::int64_t param_count(const ArchIR& ir) {
  std::int64_t total = 0;
  for (const auto& layer : ir.layers) {
    if (const auto* c = std::get_if<ConvLayer>(&layer.op)) {
      total += std::int64_t{c->kernel} * c->kernel * c->c_in * c->c_out + (c->bias ? c->c_out : 0);
    } else if (const auto* d = std::get_if<DenseLayer>(&layer.op)) {
      total += d->n_in * d->n_out + (d->bias ? d->n_out : 0);
    }
  }
  return total;
}

std::int64_t flop_count(const ArchIR& ir) {
  const auto shapes = infer_shapes(ir);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ir.layers.size(); ++i) {
    const auto& op = ir.layers[i].op;
    if (const auto* c = std::get_if<ConvLayer>(&op)) {
      const auto& out = shapes[i + 1];
      total += std::int64_t{c->kernel} * c->kernel * c->c_in * c->c_out * out.height * out.width;
    } else if (const auto* d = std::get_if<DenseLayer>(&op)) {
      total += d->n_in * d->n_out;
    }
  }
  return total;
}

std::int64_t conv_depth(const ArchIR& ir) {
  return std::count_if(ir.layers.begin(), ir.layers.end(),
                       [](const Layer& l) { return std::holds_alternative<ConvLayer>(l.op); });
}

ArchStats arch_stats(const ArchIR& ir) { return {conv_depth(ir), param_count(ir), flop_count(ir)}; }

std::string describe(const ArchIR& ir) {
  const auto shapes = infer_shapes(ir);
  std::ostringstream os;
  os << "input " << ir.input.channels << 'x' << ir.input.height << 'x' << ir.input.width << '\n';
  for (std::size_t i = 0; i < ir.layers.size(); ++i) {
    const auto& layer = ir.layers[i];
    os << (i + 1) << " <- " << layer.src << ' ';
    std::visit(overloaded{
                   [&](const ConvLayer& c) {
                     os << "conv k" << c.kernel << " s" << c.stride << ' ' << c.c_in << "->" << c.c_out;
                   },
                   [&](const PoolLayer& p) {
                     os << (p.kind == PoolType::Max ? "maxpool" : "meanpool") << " k" << p.kernel << " s"
                        << p.stride;
                   },
                   [&](const DenseLayer& d) { os << "dense " << d.n_in << "->" << d.n_out; },
                   [&](const SkipLayer& s) {
                     os << (s.mode == MergeMode::Add ? "add " : "concat ") << s.from;
                   },
               },
               layer.op);
    const auto& out = shapes[i + 1];
    os << " : " << out.channels << 'x' << out.height << 'x' << out.width << '\n';
  }
  return os.str();
}

}  // namespace enasfarm
