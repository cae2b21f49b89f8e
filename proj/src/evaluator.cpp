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


#include "enasfarm/evaluator.hpp"

#include <unordered_map>

#include "enasfarm/errors.hpp"

namespace enasfarm {

Evaluator::Evaluator(EvaluatorOptions options, JobExecutor& executor, FitnessCache& cache, Listener& listener)
    : options_(std::move(options)), executor_(executor), cache_(cache), listener_(listener) {}

std::int64_t Evaluator::params_of(const Genotype& g) const {
  try {
    return param_count(decode(g, options_.input, options_.classes, options_.decode));
  } catch (const DecodeError&) {
    return kUndecodableParams;
  }
}

void Evaluator::evaluate(std::span<Individual> members) {
  RecordBus& bus = executor_.bus();
  std::vector<JobSpec> jobs;
  std::vector<std::vector<std::size_t>> served;  // member indices per job
  std::unordered_map<Identifier, std::size_t> job_of;

  for (std::size_t i = 0; i < members.size(); ++i) {
    Individual& m = members[i];
    if (m.evaluated()) continue;
    JobSpec job;
    try {
      job = make_job(m.name(), m.genotype(), options_.train, options_.input, options_.classes, options_.decode,
                     options_.seed);
    } catch (const DecodeError& e) {
      ++stats_.decode_failures;
      m.set_fitness({Fitness{}, kUndecodableParams});
      bus.publish(LogRecord{m.name(), std::string("decode failed: ") + e.what()});
      bus.publish(FitnessRecord{m.name(), m.id(), Fitness{}, 0.0});
      continue;
    }
    if (options_.use_cache) {
      if (const auto hit = cache_.lookup(m.id())) {
        ++stats_.cache_hits;
        m.set_fitness({*hit, job.stats.params});
        continue;
      }
      if (const auto it = job_of.find(m.id()); it != job_of.end()) {
        ++stats_.batch_duplicates;
        served[it->second].push_back(i);
        continue;
      }
      job_of.emplace(m.id(), jobs.size());
    }
    jobs.push_back(std::move(job));
    served.push_back({i});
  }

  if (!jobs.empty()) {
    stats_.jobs += static_cast<std::int64_t>(jobs.size());
    const auto outcomes = executor_.execute(jobs);
    bool interrupted = false;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const auto& out = outcomes[k];
      if (out.interrupted) {
        interrupted = true;
        continue;
      }
      Fitness fitness;
      if (out.result) {
        fitness = out.result->fitness;
      } else {
        ++stats_.failed_jobs;
        bus.publish(LogRecord{jobs[k].name, "scored 0.00: " + out.error});
        bus.publish(FitnessRecord{jobs[k].name, jobs[k].id, Fitness{}, 0.0});
      }
      for (const auto i : served[k]) members[i].set_fitness({fitness, jobs[k].stats.params});
    }
    if (interrupted) {
      listener_.drain();
      throw InterruptedError("evaluation interrupted; running jobs were killed");
    }
  }
  listener_.drain();
}

}  // namespace enasfarm
