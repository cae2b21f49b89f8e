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
#include <limits>
#include <span>

#include "enasfarm/cache.hpp"
#include "enasfarm/config.hpp"
#include "enasfarm/executor.hpp"
#include "enasfarm/population.hpp"
#include "enasfarm/record_bus.hpp"

namespace enasfarm {

struct EvaluatorOptions {
  TrainConfig train;
  TensorShape input{3, 32, 32};
  int classes = 10;
  DecodeOptions decode;
  std::uint64_t seed = 0;
  /// Off: every unevaluated member becomes a backend job, duplicates
  /// included.
  bool use_cache = true;
};

struct EvaluationStats {
  std::int64_t jobs = 0;
  std::int64_t cache_hits = 0;
  std::int64_t batch_duplicates = 0;
  std::int64_t decode_failures = 0;
  std::int64_t failed_jobs = 0;
};

/// Parameter count recorded for architectures that do not decode.
inline constexpr std::int64_t kUndecodableParams = std::numeric_limits<std::int64_t>::max();

/// Assigns fitness to individuals: cache hits are answered locally, misses
/// become one job per distinct identifier on the executor, and the listener
/// is drained afterwards so the cache reflects the batch.
class Evaluator {
 public:
  Evaluator(EvaluatorOptions options, JobExecutor& executor, FitnessCache& cache, Listener& listener);

  /// Sets fitness on every member that lacks it. Failed jobs and
  /// undecodable genotypes score 0.00. Throws InterruptedError.
  void evaluate(std::span<Individual> members);
  void evaluate(Population& pop) { evaluate(std::span<Individual>(pop.members)); }

  /// Parameter count of the decoded genotype, kUndecodableParams if it
  /// does not decode.
  std::int64_t params_of(const Genotype& g) const;

  const EvaluationStats& stats() const { return stats_; }
  const EvaluatorOptions& options() const { return options_; }

 private:
  EvaluatorOptions options_;
  JobExecutor& executor_;
  FitnessCache& cache_;
  Listener& listener_;
  EvaluationStats stats_;
};

}  // namespace enasfarm
