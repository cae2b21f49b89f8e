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


#include "enasfarm/runner.hpp"

#include <algorithm>
#include <sstream>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace fs = std::filesystem;

// ------------------------------------------------------------------ RunState

std::optional<RunState> read_run_state(const fs::path& run_dir) {
  const auto path = run_dir / "run_state.txt";
  if (!fs::exists(path)) return std::nullopt;
  RunState s;
  bool has_flag = false;
  for (const auto& line : split(read_file(path), '\n')) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw RestartError(path.string() + ": malformed line '" + line + "'");
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key == "is_running") {
      if (value != "0" && value != "1") throw RestartError(path.string() + ": is_running must be 0 or 1");
      s.is_running = value == "1";
      has_flag = true;
    } else if (key == "algorithm") {
      s.algorithm = value;
    } else if (key == "generation") {
      const auto g = parse_int(value);
      if (!g || *g < 0) throw RestartError(path.string() + ": bad generation");
      s.generation = static_cast<int>(*g);
    } else {
      throw RestartError(path.string() + ": unknown key " + key);
    }
  }
  if (!has_flag) throw RestartError(path.string() + ": missing is_running");
  return s;
}

void write_run_state(const fs::path& run_dir, const RunState& state) {
  write_file_atomic(run_dir / "run_state.txt", "is_running=" + std::string(state.is_running ? "1" : "0") +
                                                   "\nalgorithm=" + state.algorithm +
                                                   "\ngeneration=" + std::to_string(state.generation) + "\n");
}

// ------------------------------------------------------------ population log

std::string format_individual(const Individual& ind) {
  return "name=" + ind.name() + ";enc=" + canonical_serialize(ind.genotype()) + ";id=" + ind.id().hex() +
         ";fit=" + (ind.evaluated() ? ind.accuracy().to_string() : "NA");
}

std::string format_population(const Population& pop) {
  std::string out;
  for (const auto& m : pop.members) out += format_individual(m) + "\n";
  return out;
}

fs::path population_log_path(const fs::path& run_dir, int t) {
  return run_dir / ("begin_" + std::to_string(t) + ".txt");
}

std::vector<int> list_generations(const fs::path& run_dir) {
  std::vector<int> out;
  std::error_code ec;
  for (fs::directory_iterator it(run_dir, ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (!starts_with(name, "begin_") || name.size() <= 10 || name.substr(name.size() - 4) != ".txt") continue;
    const auto t = parse_int(name.substr(6, name.size() - 10));
    if (t && *t >= 0) out.push_back(static_cast<int>(*t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void save_population(const fs::path& run_dir, int t, const Population& pop) {
  if (!pop.all_evaluated()) throw EvaluationOrderError("population " + std::to_string(t) + " has unevaluated members");
  const auto path = population_log_path(run_dir, t);
  if (fs::exists(path)) throw PersistError(path.string() + " already exists");
  write_file_atomic(path, format_population(pop));
}

Population load_population(const fs::path& path, int t, const ParamsFn& params) {
  Population pop{t, {}};
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw CorruptLogError(path.string() + ": " + e.what());
  }
  const auto lines = split(text, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto where = path.string() + ":" + std::to_string(n + 1);
    const auto fields = split(lines[n], ';');
    static const char* const keys[] = {"name=", "enc=", "id=", "fit="};
    if (fields.size() != 4) throw CorruptLogError(where + ": expected 4 fields");
    for (int k = 0; k < 4; ++k) {
      if (!starts_with(fields[static_cast<std::size_t>(k)], keys[k])) {
        throw CorruptLogError(where + ": field " + std::to_string(k + 1) + " must start with " + keys[k]);
      }
    }
    const auto name = fields[0].substr(5);
    const auto enc = fields[1].substr(4);
    const auto id = fields[2].substr(3);
    const auto fit = fields[3].substr(4);
    Genotype g;
    try {
      g = parse_genotype(enc);
    } catch (const Error& e) {
      throw CorruptLogError(where + ": bad encoding: " + e.what());
    }
    Individual ind(name, g, birth_generation(name).value_or(0));
    if (ind.id().hex() != id) {
      throw CorruptLogError(where + ": identifier " + id + " does not match encoding (expected " + ind.id().hex() +
                            ")");
    }
    if (fit == "NA") throw CorruptLogError(where + ": member without fitness");
    try {
      ind.set_fitness({Fitness::parse(fit), params ? params(g) : 0});
    } catch (const ParseError& e) {
      throw CorruptLogError(where + ": " + e.what());
    }
    pop.members.push_back(std::move(ind));
  }
  if (pop.members.empty()) throw CorruptLogError(path.string() + ": empty population log");
  return pop;
}

std::pair<int, Population> load_latest_population(const fs::path& run_dir, const ParamsFn& params) {
  const auto gens = list_generations(run_dir);
  if (gens.empty()) throw RestartError("no population logs in " + run_dir.string());
  const int t = gens.back();
  return {t, load_population(population_log_path(run_dir, t), t, params)};
}

// -------------------------------------------------------------------- Runner

Runner::Runner(fs::path run_dir, StrategyConfig config, Evaluator& evaluator, RunnerHooks hooks)
    : run_dir_(std::move(run_dir)), config_(std::move(config)), strategy_(make_strategy(config_)),
      evaluator_(evaluator), hooks_(std::move(hooks)) {}

void Runner::persist(int t) {
  if (hooks_.before_save) hooks_.before_save(t);
  save_population(run_dir_, t, pop_);
  write_run_state(run_dir_, {true, config_.strategy, t});
  if (hooks_.after_save) hooks_.after_save(t);
}

Individual Runner::run() {
  fs::create_directories(run_dir_);
  const auto state = read_run_state(run_dir_);
  const auto gens = list_generations(run_dir_);
  int t = 0;
  if ((state && state->is_running) || (!state && !gens.empty())) {
    if (state && state->algorithm != config_.strategy) {
      throw RestartError(run_dir_.string() + " belongs to algorithm '" + state->algorithm + "', not '" +
                         config_.strategy + "'");
    }
    if (gens.empty()) throw RestartError(run_dir_.string() + ": is_running=1 but no population logs");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      if (gens[i] != static_cast<int>(i)) {
        throw RestartError(run_dir_.string() + ": population logs are not contiguous (missing begin_" +
                           std::to_string(i) + ".txt)");
      }
    }
    auto [latest, pop] =
        load_latest_population(run_dir_, [this](const Genotype& g) { return evaluator_.params_of(g); });
    t = latest;
    pop_ = std::move(pop);
    if (!state) write_run_state(run_dir_, {true, config_.strategy, t});
  } else if (state && !gens.empty()) {
    throw RestartError(run_dir_.string() + ": run already completed; use a new run directory");
  } else {
    Rng rng(derive_seed(config_.seed, 0));
    pop_ = strategy_->initialize(rng);
    evaluator_.evaluate(pop_);
    persist(0);
  }

  while (t + 1 < config_.max_gen) {
    Rng rng(derive_seed(config_.seed, static_cast<std::uint64_t>(t) + 1));
    auto offspring = strategy_->offspring(pop_, rng);
    evaluator_.evaluate(std::span<Individual>(offspring));
    pop_ = strategy_->survive(pop_, offspring);
    ++t;
    persist(t);
  }
  write_run_state(run_dir_, {false, config_.strategy, t});
  return pop_.best();
}

}  // namespace enasfarm
