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

#include "enasfarm/backend.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/evaluator.hpp"
#include "enasfarm/sim_farm.hpp"
#include "temp_dir.hpp"

namespace enasfarm {
namespace {

class EvaluatorTest : public ::testing::Test {
 protected:
  void build(bool use_cache = true, const std::string& faults = "") {
    SimFarmSpec spec;
    spec.workers = {{"sim0", 3}};
    spec.retries = 1;
    spec.faults = parse_fault_script(faults);
    farm = std::make_unique<SimulatedFarm>(spec, bus);
    cache = std::make_unique<FitnessCache>(dir / "cache.txt", train.digest());
    listener = std::make_unique<Listener>(bus, cache.get(), ListenerPaths::in(dir.path()));
    EvaluatorOptions o;
    o.train = train;
    o.seed = 5;
    o.use_cache = use_cache;
    eval = std::make_unique<Evaluator>(o, *farm, *cache, *listener);
  }

  // Six members over four genotypes: slots 0/3 and 1/4 repeat.
  std::vector<Individual> batch(int gen = 0) {
    Rng rng(8);
    SearchSpace space;
    std::vector<Genotype> g;
    for (int i = 0; i < 4; ++i) g.push_back(space.sample(rng));
    const std::vector<int> pick{0, 1, 2, 0, 1, 3};
    std::vector<Individual> out;
    for (std::size_t i = 0; i < pick.size(); ++i) {
      out.emplace_back(individual_name(gen, static_cast<int>(i)), g[static_cast<std::size_t>(pick[i])], gen);
    }
    return out;
  }

  Fitness expected(const Individual& m) const {
    return surrogate_fitness(make_job(m.name(), m.genotype(), train, {3, 32, 32}, 10, {}, 5)).fitness;
  }

  testing::TempDir dir{"eval"};
  TrainConfig train;
  InProcessBus bus;
  std::unique_ptr<SimulatedFarm> farm;
  std::unique_ptr<FitnessCache> cache;
  std::unique_ptr<Listener> listener;
  std::unique_ptr<Evaluator> eval;
};

TEST_F(EvaluatorTest, DeduplicatesAndCaches) {
  build();
  auto pop = batch();
  eval->evaluate(pop);
  EXPECT_EQ(eval->stats().jobs, 4);
  EXPECT_EQ(eval->stats().batch_duplicates, 2);
  EXPECT_EQ(farm->accounting().jobs, 4);
  for (const auto& m : pop) {
    ASSERT_TRUE(m.evaluated());
    EXPECT_EQ(m.accuracy(), expected(m)) << m.name();
    EXPECT_EQ(m.fitness().params, eval->params_of(m.genotype()));
  }
  EXPECT_EQ(cache->size(), 4u);
  EXPECT_EQ(bus.pending(), 0u);

  auto again = batch(1);
  eval->evaluate(again);
  EXPECT_EQ(eval->stats().jobs, 4);
  EXPECT_EQ(eval->stats().cache_hits, 6);
  for (std::size_t i = 0; i < pop.size(); ++i) EXPECT_EQ(again[i].fitness(), pop[i].fitness());
}

TEST_F(EvaluatorTest, CacheDisabledRunsEveryMember) {
  build(false);
  auto pop = batch();
  eval->evaluate(pop);
  EXPECT_EQ(eval->stats().jobs, 6);
  EXPECT_EQ(farm->accounting().jobs, 6);
  auto again = batch(1);
  eval->evaluate(again);
  EXPECT_EQ(eval->stats().jobs, 12);
  EXPECT_EQ(eval->stats().cache_hits, 0);
}

TEST_F(EvaluatorTest, SkipsEvaluatedMembers) {
  build();
  auto pop = batch();
  pop[2].set_fitness({Fitness::parse("12.34"), 7});
  eval->evaluate(pop);
  EXPECT_EQ(eval->stats().jobs, 3);
  EXPECT_EQ(pop[2].accuracy().to_string(), "12.34");
}

TEST_F(EvaluatorTest, FailedJobScoresZero) {
  build(true, "fail indi_gen00_no02 2\n");
  auto pop = batch();
  eval->evaluate(pop);
  EXPECT_EQ(eval->stats().failed_jobs, 1);
  EXPECT_EQ(pop[2].accuracy().to_string(), "0.00");
  EXPECT_EQ(cache->lookup(pop[2].id())->to_string(), "0.00");
  EXPECT_NE(read_file(dir / "run.log").find("[indi_gen00_no02] scored 0.00"), std::string::npos);
  EXPECT_EQ(pop[0].accuracy(), expected(pop[0]));
}

TEST_F(EvaluatorTest, UndecodableScoresZeroWithoutJob) {
  build();
  EvaluatorOptions o = eval->options();
  o.input = {3, 1, 1};  // any pooling collapses this
  Evaluator tiny(o, *farm, *cache, *listener);
  Rng rng(2);
  SearchSpace space;
  std::optional<Genotype> bad;
  for (int i = 0; i < 200 && !bad; ++i) {
    auto g = space.sample(rng);
    if (tiny.params_of(g) == kUndecodableParams) bad = g;
  }
  ASSERT_TRUE(bad);
  std::vector<Individual> pop{Individual("indi_gen00_no00", *bad, 0)};
  tiny.evaluate(pop);
  EXPECT_EQ(tiny.stats().decode_failures, 1);
  EXPECT_EQ(tiny.stats().jobs, 0);
  EXPECT_EQ(pop[0].accuracy().to_string(), "0.00");
  EXPECT_EQ(pop[0].fitness().params, kUndecodableParams);
  EXPECT_NE(read_file(dir / "run.log").find("decode failed"), std::string::npos);
}

TEST_F(EvaluatorTest, InterruptLeavesUnfinishedUnevaluated) {
  build(true, "at 0.000001 interrupt\n");
  auto pop = batch();
  EXPECT_THROW(eval->evaluate(pop), InterruptedError);
  for (const auto& m : pop) EXPECT_FALSE(m.evaluated()) << m.name();
  EXPECT_EQ(cache->size(), 0u);
  EXPECT_EQ(bus.pending(), 0u);
}

}  // namespace
}  // namespace enasfarm
