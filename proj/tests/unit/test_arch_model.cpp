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


#include <gtest/gtest.h>

#include <random>
#include <set>

#include "enasfarm/arch_ir.hpp"
#include "enasfarm/decode.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/genotype.hpp"
#include "enasfarm/search_space.hpp"
#include "oracles.hpp"
#include "ref_sha224.hpp"

namespace enasfarm {
namespace {

using testing::ref_sha224_hex;
using testing::random_ir;

Genotype fb(std::vector<int> stages, std::vector<std::uint8_t> bits) {
  return Genotype(FixedBinaryGenes{std::move(stages), std::move(bits)});
}

TEST(Serialize, FixedBinaryOneStage) {
  EXPECT_EQ(canonical_serialize(fb({3}, {0, 1, 1})), "FB:3:011");
}

TEST(Serialize, VariableBlocks) {
  const Genotype g(VariableBlockGenes{{BlockGene::res(64), BlockGene::pool(PoolType::Max)}});
  EXPECT_EQ(canonical_serialize(g), "VB:R:64:1|P:max");
}

TEST(Serialize, RoundTripAllSchemes) {
  Rng rng(3);
  for (const auto scheme : {Scheme::FixedBinary, Scheme::VariableBlocks, Scheme::CellGraph}) {
    SearchSpace space;
    space.scheme = scheme;
    for (int i = 0; i < 300; ++i) {
      const auto g = space.sample(rng);
      const auto text = canonical_serialize(g);
      EXPECT_EQ(parse_genotype(text), g) << text;
      EXPECT_EQ(canonical_serialize(parse_genotype(text)), text);
    }
  }
}

TEST(Serialize, InjectiveOnDistinctPayloads) {
  Rng rng(11);
  SearchSpace space;
  space.scheme = Scheme::VariableBlocks;
  std::map<std::string, Genotype> seen;
  for (int i = 0; i < 3000; ++i) {
    const auto g = space.sample(rng);
    const auto [it, inserted] = seen.emplace(canonical_serialize(g), g);
    if (!inserted) EXPECT_EQ(it->second, g);
  }
}

TEST(Serialize, RejectsMalformed) {
  EXPECT_THROW(parse_genotype("FB:3:01"), Error);
  EXPECT_THROW(parse_genotype("XX:1"), Error);
  EXPECT_THROW(parse_genotype("VB:P:max"), Error);  // no computing block
  EXPECT_THROW(canonical_serialize(fb({3}, {0, 1})), InvariantViolation);
}

TEST(Identifier, MatchesReferenceSha224) {
  EXPECT_EQ(identifier(fb({3}, {0, 1, 1})).hex(), ref_sha224_hex("FB:3:011"));
  // FIPS 180-4 test vector for the reference itself.
  EXPECT_EQ(ref_sha224_hex("abc"), "23097d223405d8228642a477bda255b32aadbce4bda0b3f7e36c9da7");
}

TEST(Identifier, OneBitApartDiffers) {
  const auto a = identifier(fb({3}, {0, 1, 1}));
  const auto b = identifier(fb({3}, {0, 0, 1}));
  EXPECT_NE(a, b);
  EXPECT_EQ(a.hex(), ref_sha224_hex("FB:3:011"));
  EXPECT_EQ(b.hex(), ref_sha224_hex("FB:3:001"));
  EXPECT_EQ(a.hex().size(), 56u);
}

TEST(Identifier, DistinctOnSampledCorpus) {
  Rng rng(5);
  SearchSpace space;
  space.scheme = Scheme::VariableBlocks;
  space.max_blocks = 12;
  std::set<std::string> encodings;
  std::set<std::string> ids;
  while (encodings.size() < 10000) {
    const auto g = space.sample(rng);
    if (encodings.insert(canonical_serialize(g)).second) ids.insert(identifier(g).hex());
  }
  EXPECT_EQ(ids.size(), 10000u);
}

TEST(Decode, AllZeroBitsGivesParallelNodesSummed) {
  const auto ir = decode(fb({3}, {0, 0, 0}), {3, 32, 32}, 10);
  int convs = 0, adds = 0;
  for (const auto& l : ir.layers) {
    if (const auto* c = std::get_if<ConvLayer>(&l.op)) {
      ++convs;
      EXPECT_EQ(l.src, 0);  // every node reads the stage input
      EXPECT_EQ(c->c_in, 3);
    }
    if (std::holds_alternative<SkipLayer>(l.op)) ++adds;
  }
  EXPECT_EQ(convs, 3);
  EXPECT_EQ(adds, 2);
  EXPECT_TRUE(std::holds_alternative<DenseLayer>(ir.layers.back().op));
}

TEST(Decode, PoolCollapse) {
  std::vector<BlockGene> blocks{BlockGene::res(32)};
  for (int i = 0; i < 6; ++i) blocks.push_back(BlockGene::pool(PoolType::Max));
  EXPECT_THROW(decode(Genotype(VariableBlockGenes{blocks}), {3, 32, 32}, 10), DecodeError);
}

TEST(Decode, ResUnitHandExpanded) {
  const auto ir = decode(Genotype(VariableBlockGenes{{BlockGene::res(64)}}), {3, 32, 32}, 10);
  ASSERT_EQ(ir.layers.size(), 4u);
  EXPECT_EQ(ir.layers[0], (Layer{0, ConvLayer{3, 3, 64, 1, true}}));
  EXPECT_EQ(ir.layers[1], (Layer{1, ConvLayer{3, 64, 64, 1, true}}));
  EXPECT_EQ(ir.layers[2], (Layer{2, SkipLayer{0, MergeMode::Add}}));
  EXPECT_EQ(ir.layers[3], (Layer{3, DenseLayer{64 * 32 * 32, 10, true}}));
  // 1792 + 36928 + 0 + 655370
  EXPECT_EQ(param_count(ir), 1792 + 36928 + 65536 * 10 + 10);
}

TEST(Decode, NeverShapeInconsistent) {
  Rng rng(9);
  for (const auto scheme : {Scheme::FixedBinary, Scheme::VariableBlocks, Scheme::CellGraph}) {
    SearchSpace space;
    space.scheme = scheme;
    for (int i = 0; i < 200; ++i) {
      const auto g = space.sample(rng);
      try {
        const auto ir = decode(g, space.input, space.classes, space.decode);
        EXPECT_NO_THROW(infer_shapes(ir));
        EXPECT_EQ(infer_shapes(ir).back(), (TensorShape{10, 1, 1}));
      } catch (const DecodeError&) {
      }
    }
  }
}

// ------------------------------------------------------- counting oracle

TEST(Count, SpotValues) {
  ArchIR conv;
  conv.input = {3, 32, 32};
  conv.add(0, ConvLayer{3, 3, 64, 1, true});
  EXPECT_EQ(param_count(conv), 1792);
  EXPECT_EQ(flop_count(conv), 1769472);

  ArchIR dense;
  dense.input = {128, 1, 1};
  dense.add(0, DenseLayer{128, 10, true});
  EXPECT_EQ(param_count(dense), 1290);
  EXPECT_EQ(flop_count(dense), 1280);

  ArchIR pool;
  pool.input = {8, 4, 4};
  pool.add(0, PoolLayer{PoolType::Max, 2, 2});
  EXPECT_EQ(param_count(pool), 0);
  EXPECT_EQ(flop_count(pool), 0);

  ArchIR empty;
  empty.input = {1, 1, 1};
  EXPECT_EQ(param_count(empty), 0);
}

TEST(Count, TabulationOracleOnRandomIrs) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = random_ir(rng);
    ASSERT_EQ(param_count(t.ir), t.params) << describe(t.ir);
    ASSERT_EQ(flop_count(t.ir), t.macs) << describe(t.ir);
  }
}

TEST(Count, ShapeMismatchDetected) {
  ArchIR ir;
  ir.input = {3, 8, 8};
  ir.add(0, ConvLayer{3, 4, 8, 1, true});
  EXPECT_THROW(infer_shapes(ir), InvariantViolation);
}

}  // namespace
}  // namespace enasfarm
