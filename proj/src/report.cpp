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


#include "enasfarm/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "enasfarm/decode.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/job.hpp"
#include "enasfarm/runner.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace fs = std::filesystem;

// ------------------------------------------------------------- RetrainRecord

std::string RetrainRecord::to_string() const {
  return "name=" + name + ";id=" + id + ";search=" + search.to_string() + ";retrain=" + retrain.to_string() +
         ";epochs=" + std::to_string(epochs) + ";duration=" + format_fixed(duration_s, 3);
}

RetrainRecord RetrainRecord::parse(const std::string& line) {
  std::map<std::string, std::string> kv;
  for (const auto& field : split(trim(line), ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ReportError("retrain record: malformed field '" + field + "'");
    kv[field.substr(0, eq)] = field.substr(eq + 1);
  }
  const auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ReportError(std::string("retrain record: missing ") + key);
    return it->second;
  };
  RetrainRecord r;
  r.name = need("name");
  r.id = need("id");
  try {
    r.search = Fitness::parse(need("search"));
    r.retrain = Fitness::parse(need("retrain"));
  } catch (const ParseError& e) {
    throw ReportError(std::string("retrain record: ") + e.what());
  }
  const auto epochs = parse_int(need("epochs"));
  if (!epochs || *epochs < 0) throw ReportError("retrain record: bad epochs");
  r.epochs = static_cast<int>(*epochs);
  if (kv.count("duration")) {
    const auto d = parse_double(kv["duration"]);
    if (!d) throw ReportError("retrain record: bad duration");
    r.duration_s = *d;
  }
  return r;
}

// --------------------------------------------------------------- summarize

namespace {

ParsedConfigs run_configs(const fs::path& dir) {
  const auto g = dir / "global.ini";
  const auto t = dir / "train.ini";
  if (!fs::exists(g) || !fs::exists(t)) {
    throw ReportError(dir.string() + ": not a run directory (global.ini / train.ini missing)");
  }
  try {
    return parse_configs(g, t);
  } catch (const ConfigError& e) {
    throw ReportError(dir.string() + ": " + e.what());
  }
}

std::string na(const std::optional<Fitness>& f) { return f ? f->to_string() : "NA"; }
std::string na(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : "NA"; }

std::string label(const ComparisonRow& row) {
  std::string s = row.algorithm;
  if (row.partial) s += " (partial)";
  if (row.mixed) s += "*";
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ComparisonRow summarize_run(const fs::path& dir) {
  const auto cfg = run_configs(dir);
  ComparisonRow row;
  row.algorithm = cfg.global.name;
  row.digest = cfg.train.digest();
  row.dir = dir;

  std::optional<RunState> state;
  try {
    state = read_run_state(dir);
  } catch (const RestartError&) {
    state.reset();
  }
  const auto gens = list_generations(dir);
  row.partial = !state || state->is_running || gens.empty();

  if (fs::exists(dir / "farm.txt")) {
    const auto acct = FarmAccounting::parse(read_file(dir / "farm.txt"));
    row.gpu_days = acct.gpu_days();
    row.evaluations = acct.jobs;
  }
  if (gens.empty()) return row;

  Population pop;
  try {
    pop = load_population(population_log_path(dir, gens.back()), gens.back());
  } catch (const RestartError&) {
    row.partial = true;
    return row;
  }
  const auto& space = cfg.global.strategy.space;
  const Individual& best = pop.best();
  row.search_acc = best.accuracy();
  try {
    const auto stats = arch_stats(decode(best.genotype(), space.input, space.classes, space.decode));
    row.params = stats.params;
    row.flops = stats.flops;
  } catch (const DecodeError&) {
  }
  if (!row.partial && fs::exists(dir / "retrain.txt")) {
    const auto rec = RetrainRecord::parse(read_file(dir / "retrain.txt"));
    if (rec.id == best.id().hex()) row.retrain_acc = rec.retrain;
  }
  return row;
}

// ------------------------------------------------------------------- compare

Report compare(std::span<const fs::path> dirs, bool allow_mixed) {
  if (dirs.empty()) throw ReportError("compare needs at least one run directory");
  Report report;
  for (const auto& d : dirs) report.rows.push_back(summarize_run(d));
  for (const auto& r : report.rows) {
    if (r.digest != report.rows.front().digest) report.mixed = true;
  }
  if (report.mixed) {
    if (!allow_mixed) {
      std::string msg = "refusing to compare runs trained with different settings:";
      for (const auto& r : report.rows) msg += "\n  " + r.dir.string() + " train.ini " + r.digest;
      throw MixedSettingsError(msg + "\n(pass --allow-mixed to tabulate them anyway)");
    }
    for (auto& r : report.rows) r.mixed = true;
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    // NA sorts after every value.
    const auto key = [](const std::optional<Fitness>& f) { return f ? f->centi() : -1; };
    if (key(a.retrain_acc) != key(b.retrain_acc)) return key(a.retrain_acc) > key(b.retrain_acc);
    if (key(a.search_acc) != key(b.search_acc)) return key(a.search_acc) > key(b.search_acc);
    if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
    return a.dir.string() < b.dir.string();
  });
  return report;
}

std::string Report::csv() const {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_field(label(r)) + "," + na(r.search_acc) + "," + na(r.retrain_acc) + "," + na(r.params) + "," +
           na(r.flops) + "," + format_fixed(r.gpu_days, 4) + "," + std::to_string(r.evaluations) + "\n";
  }
  return out;
}

std::string Report::table() const {
  const std::vector<std::string> head{"Algorithm", "Search acc", "Retrain acc", "#Params", "FLOPs (MACs)",
                                      "GPU days", "Evaluations"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& r : rows) {
    cells.push_back({label(r), na(r.search_acc), na(r.retrain_acc), na(r.params), na(r.flops),
                     format_fixed(r.gpu_days, 4), std::to_string(r.evaluations)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const auto& s = cells[i][c];
      const auto pad = std::string(width[c] - s.size(), ' ');
      line += c == 0 ? s + pad : "  " + pad + s;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (const auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  out += "\nFLOPs are multiply-accumulate counts. GPU days = busy slot-seconds / 86400.\n";
  if (mixed) out += "* trained with differing train.ini settings; accuracies are not comparable.\n";
  return out;
}

// ------------------------------------------------------------------- retrain

RetrainRecord retrain_best(const fs::path& run_dir, JobExecutor& executor, Listener& listener,
                           const TrainConfig& retrain) {
  const auto cfg = run_configs(run_dir);
  std::optional<RunState> state;
  try {
    state = read_run_state(run_dir);
  } catch (const RestartError& e) {
    throw ReportError(e.what());
  }
  if (!state || state->is_running) throw ReportError(run_dir.string() + ": run has not completed");
  const auto gens = list_generations(run_dir);
  if (gens.empty()) throw ReportError(run_dir.string() + ": no final population log");
  Population pop;
  try {
    pop = load_population(population_log_path(run_dir, gens.back()), gens.back());
  } catch (const RestartError& e) {
    throw ReportError(e.what());
  }
  const Individual& best = pop.best();
  const auto& space = cfg.global.strategy.space;
  JobSpec job;
  try {
    job = make_job(best.name(), best.genotype(), retrain, space.input, space.classes, space.decode,
                   cfg.global.strategy.seed);
  } catch (const DecodeError& e) {
    throw ReportError("best member " + best.name() + " does not decode: " + e.what());
  }
  const auto outcomes = executor.execute(std::span<const JobSpec>(&job, 1));
  listener.drain();
  const auto& out = outcomes.front();
  if (!out.result) throw ReportError("retraining " + best.name() + " failed: " + out.error);

  RetrainRecord rec{best.name(), best.id().hex(), best.accuracy(), out.result->fitness,
                    retrain.trainer.total_epochs, out.result->duration_s};
  write_file_atomic(run_dir / "retrain.txt", rec.to_string() + "\n");
  return rec;
}

}  // namespace enasfarm
