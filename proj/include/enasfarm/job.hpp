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
#include <functional>
#include <string>

#include "json.hpp"

#include "enasfarm/arch_ir.hpp"
#include "enasfarm/config.hpp"
#include "enasfarm/decode.hpp"
#include "enasfarm/fitness.hpp"
#include "enasfarm/genotype.hpp"

namespace enasfarm {

/// Everything a backend needs to produce one fitness value. The architecture
/// travels twice: as the canonical genotype and as decoded statistics plus a
/// layer listing, so external trainers need not reimplement decoding.
struct JobSpec {
  std::string name;
  Identifier id;
  std::string encoding;
  std::string script;
  ArchStats stats;
  TrainerSettings settings;
  BackendConfig backend;
  std::uint64_t seed = 0;

  bool operator==(const JobSpec& o) const {
    return name == o.name && id == o.id && encoding == o.encoding && script == o.script &&
           stats.depth == o.stats.depth && stats.params == o.stats.params && stats.flops == o.stats.flops &&
           settings == o.settings && backend == o.backend && seed == o.seed;
  }
};

/// Decodes `g` and fills a job. Throws DecodeError.
JobSpec make_job(const std::string& name, const Genotype& g, const TrainConfig& train, const TensorShape& input,
                 int classes, const DecodeOptions& decode, std::uint64_t seed);

struct JobResult {
  Fitness fitness;
  /// Seconds of (possibly virtual) device time the job consumed.
  double duration_s = 0.0;
};

/// Streaming sink for trainer output lines.
using LogSink = std::function<void(const std::string& line)>;

nlohmann::json trainer_to_json(const TrainerSettings& s);
TrainerSettings trainer_from_json(const nlohmann::json& j);
nlohmann::json backend_to_json(const BackendConfig& b);
BackendConfig backend_from_json(const nlohmann::json& j);

/// {"name","identifier","payload":{...},"backend","settings":{...},"seed"}.
nlohmann::json job_to_json(const JobSpec& job);
/// Throws ProtocolError on missing or mistyped fields.
JobSpec job_from_json(const nlohmann::json& j);

}  // namespace enasfarm
