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


#include "enasfarm/job.hpp"

#include "enasfarm/errors.hpp"

namespace enasfarm {

using nlohmann::json;

JobSpec make_job(const std::string& name, const Genotype& g, const TrainConfig& train, const TensorShape& input,
                 int classes, const DecodeOptions& decode_options, std::uint64_t seed) {
  const ArchIR ir = decode(g, input, classes, decode_options);
  JobSpec job;
  job.name = name;
  job.id = identifier(g);
  job.encoding = canonical_serialize(g);
  job.script = describe(ir);
  job.stats = arch_stats(ir);
  job.settings = train.trainer;
  job.backend = train.backend;
  job.seed = seed;
  return job;
}

json trainer_to_json(const TrainerSettings& s) {
  return {{"optimizer", s.optimizer}, {"batch_size", s.batch_size}, {"total_epoch", s.total_epochs},
          {"lr", s.lr},               {"lr_strategy", s.lr_strategy}, {"dataset", s.dataset}};
}

TrainerSettings trainer_from_json(const json& j) {
  TrainerSettings s;
  s.optimizer = j.at("optimizer").get<std::string>();
  s.batch_size = j.at("batch_size").get<int>();
  s.total_epochs = j.at("total_epoch").get<int>();
  s.lr = j.at("lr").get<double>();
  s.lr_strategy = j.at("lr_strategy").get<std::string>();
  s.dataset = j.at("dataset").get<std::string>();
  return s;
}

json backend_to_json(const BackendConfig& b) {
  return {{"kind", b.kind},
          {"tau", b.tau},
          {"noise", b.noise},
          {"base_seconds", b.base_seconds},
          {"seconds_per_mac_epoch", b.seconds_per_mac_epoch},
          {"table", b.table},
          {"fallback", b.fallback},
          {"command", b.command},
          {"timeout", b.timeout_s}};
}

BackendConfig backend_from_json(const json& j) {
  BackendConfig b;
  b.kind = j.at("kind").get<std::string>();
  b.tau = j.at("tau").get<double>();
  b.noise = j.at("noise").get<double>();
  b.base_seconds = j.at("base_seconds").get<double>();
  b.seconds_per_mac_epoch = j.at("seconds_per_mac_epoch").get<double>();
  b.table = j.at("table").get<std::string>();
  b.fallback = j.at("fallback").get<bool>();
  b.command = j.at("command").get<std::string>();
  b.timeout_s = j.at("timeout").get<double>();
  return b;
}

json job_to_json(const JobSpec& job) {
  json settings = trainer_to_json(job.settings);
  settings["backend"] = backend_to_json(job.backend);
  return {{"name", job.name},
          {"identifier", job.id.hex()},
          {"payload",
           {{"encoding", job.encoding},
            {"script", job.script},
            {"depth", job.stats.depth},
            {"params", job.stats.params},
            {"flops", job.stats.flops}}},
          {"backend", job.backend.kind},
          {"settings", settings},
          {"seed", job.seed}};
}

JobSpec job_from_json(const json& j) {
  try {
    JobSpec job;
    job.name = j.at("name").get<std::string>();
    job.id = Identifier(j.at("identifier").get<std::string>());
    const auto& payload = j.at("payload");
    job.encoding = payload.at("encoding").get<std::string>();
    job.script = payload.at("script").get<std::string>();
    job.stats.depth = payload.at("depth").get<std::int64_t>();
    job.stats.params = payload.at("params").get<std::int64_t>();
    job.stats.flops = payload.at("flops").get<std::int64_t>();
    const auto& settings = j.at("settings");
    job.settings = trainer_from_json(settings);
    job.backend = backend_from_json(settings.at("backend"));
    job.backend.kind = j.at("backend").get<std::string>();
    job.seed = j.at("seed").get<std::uint64_t>();
    return job;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed job: ") + e.what());
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("malformed job: ") + e.what());
  }
}

}  // namespace enasfarm
