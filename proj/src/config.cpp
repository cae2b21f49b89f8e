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

#include "enasfarm/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

namespace pt = boost::property_tree;

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += values[i];
  }
  return out;
}

/// Typed access to one INI document. Every key read is remembered so that
/// leftovers can be reported as unknown.
class IniDoc {
 public:
  IniDoc(const std::string& text, std::string origin) : origin_(std::move(origin)) {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree_) {
      if (!body.data().empty()) throw ConfigError(origin_ + ": key '" + section + "' outside any section");
    }
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& why) const {
    throw ConfigError(origin_ + ": [" + section + "] " + key + ": " + why);
  }

  void allow_sections(const std::set<std::string>& sections) const {
    for (const auto& [section, body] : tree_) {
      if (!sections.count(section)) throw ConfigError(origin_ + ": unknown section [" + section + "]");
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = tree_.find(section);
    return s != tree_.not_found() && s->second.find(key) != s->second.not_found();
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    seen_.insert(section + "\x1f" + key);
    const auto s = tree_.find(section);
    if (s == tree_.not_found()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.not_found()) return std::nullopt;
    return std::string(trim(k->second.data()));
  }

  std::string required(const std::string& section, const std::string& key) {
    auto v = raw(section, key);
    if (!v) fail(section, key, "missing required key");
    return *v;
  }

  void str(const std::string& section, const std::string& key, std::string& out, bool is_required = false) {
    auto v = is_required ? std::optional(required(section, key)) : raw(section, key);
    if (!v) return;
    if (v->empty() && is_required) fail(section, key, "must not be empty");
    out = *v;
  }

  void integer(const std::string& section, const std::string& key, int& out, bool is_required = false) {
    auto v = is_required ? std::optional(required(section, key)) : raw(section, key);
    if (!v) return;
    const auto parsed = parse_int(*v);
    if (!parsed || *parsed < INT32_MIN || *parsed > INT32_MAX) fail(section, key, "expected an integer, got '" + *v + "'");
    out = static_cast<int>(*parsed);
  }

  void u64(const std::string& section, const std::string& key, std::uint64_t& out) {
    auto v = raw(section, key);
    if (!v) return;
    const auto parsed = parse_int(*v);
    if (!parsed || *parsed < 0) fail(section, key, "expected a non-negative integer, got '" + *v + "'");
    out = static_cast<std::uint64_t>(*parsed);
  }

  void real(const std::string& section, const std::string& key, double& out, bool is_required = false) {
    auto v = is_required ? std::optional(required(section, key)) : raw(section, key);
    if (!v) return;
    const auto parsed = parse_double(*v);
    if (!parsed) fail(section, key, "expected a number, got '" + *v + "'");
    out = *parsed;
  }

  void boolean(const std::string& section, const std::string& key, bool& out) {
    auto v = raw(section, key);
    if (!v) return;
    if (*v == "1" || *v == "true" || *v == "on" || *v == "yes") out = true;
    else if (*v == "0" || *v == "false" || *v == "off" || *v == "no") out = false;
    else fail(section, key, "expected a boolean, got '" + *v + "'");
  }

  void int_list(const std::string& section, const std::string& key, std::vector<int>& out) {
    auto v = raw(section, key);
    if (!v) return;
    std::vector<int> values;
    for (const auto& part : split(*v, ',')) {
      const auto parsed = parse_int(trim(part));
      if (!parsed || *parsed <= 0 || *parsed > 1'000'000) fail(section, key, "expected positive integers, got '" + *v + "'");
      values.push_back(static_cast<int>(*parsed));
    }
    out = std::move(values);
  }

  void str_list(const std::string& section, const std::string& key, std::vector<std::string>& out) {
    auto v = raw(section, key);
    if (!v) return;
    out.clear();
    if (v->empty()) return;
    for (const auto& part : split(*v, ',')) out.emplace_back(trim(part));
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      for (const auto& [key, value] : body) {
        if (!seen_.count(section + "\x1f" + key)) {
          throw ConfigError(origin_ + ": [" + section + "] " + key + ": unknown key");
        }
      }
    }
  }

 private:
  std::string origin_;
  pt::ptree tree_;
  std::set<std::string> seen_;
};

void require_known(IniDoc& doc, const std::string& section, const std::string& key, const std::string& value,
                   const std::vector<std::string>& known) {
  if (std::find(known.begin(), known.end(), value) == known.end()) {
    doc.fail(section, key, "unknown value '" + value + "' (expected one of " + join(known) + ")");
  }
}

}  // namespace

// ------------------------------------------------------------------ registries

const std::vector<std::string>& known_optimizers() {
  static const std::vector<std::string> names{"SGD", "Adam", "RMSprop"};
  return names;
}

const std::vector<std::string>& known_lr_strategies() {
  static const std::vector<std::string> names{"CosineAnnealingLR", "ExponentialLR", "MultiStepLR", "StepLR"};
  return names;
}

const std::vector<std::string>& known_datasets() {
  static const std::vector<std::string> names{"MNIST", "CIFAR10", "CIFAR100", "ImageNet"};
  return names;
}

DatasetInfo dataset_info(const std::string& name) {
  if (name == "MNIST") return {{1, 28, 28}, 10};
  if (name == "CIFAR10") return {{3, 32, 32}, 10};
  if (name == "CIFAR100") return {{3, 32, 32}, 100};
  if (name == "ImageNet") return {{3, 224, 224}, 1000};
  throw ConfigError("unknown dataset '" + name + "'");
}

// ------------------------------------------------------------------ train.ini

std::string TrainConfig::to_ini() const {
  std::ostringstream os;
  os << "[optimizer]\n"
     << "_optimizer_name = " << trainer.optimizer << '\n'
     << "_batch_size = " << trainer.batch_size << '\n'
     << "_total_epoch = " << trainer.total_epochs << '\n'
     << "\n[LearningRate]\n"
     << "lr = " << shortest(trainer.lr) << '\n'
     << "lr_strategy = " << trainer.lr_strategy << '\n'
     << "\n[dataset]\n"
     << "_name = " << trainer.dataset << '\n'
     << "\n[backend]\n"
     << "kind = " << backend.kind << '\n'
     << "tau = " << shortest(backend.tau) << '\n'
     << "noise = " << shortest(backend.noise) << '\n'
     << "base_seconds = " << shortest(backend.base_seconds) << '\n'
     << "seconds_per_mac_epoch = " << shortest(backend.seconds_per_mac_epoch) << '\n'
     << "table = " << backend.table << '\n'
     << "fallback = " << (backend.fallback ? "true" : "false") << '\n'
     << "command = " << backend.command << '\n'
     << "timeout = " << shortest(backend.timeout_s) << '\n';
  return os.str();
}

std::string TrainConfig::digest() const { return sha224_hex(to_ini()); }

TrainConfig parse_train_config(const std::string& text, const std::string& origin) {
  IniDoc doc(text, origin);
  doc.allow_sections({"optimizer", "LearningRate", "dataset", "backend"});
  TrainConfig cfg;
  auto& t = cfg.trainer;
  doc.str("optimizer", "_optimizer_name", t.optimizer, true);
  doc.integer("optimizer", "_batch_size", t.batch_size, true);
  doc.integer("optimizer", "_total_epoch", t.total_epochs, true);
  doc.real("LearningRate", "lr", t.lr, true);
  doc.str("LearningRate", "lr_strategy", t.lr_strategy, true);
  doc.str("dataset", "_name", t.dataset, true);

  require_known(doc, "optimizer", "_optimizer_name", t.optimizer, known_optimizers());
  if (t.batch_size <= 0) doc.fail("optimizer", "_batch_size", "must be positive");
  if (t.total_epochs <= 0) doc.fail("optimizer", "_total_epoch", "must be positive");
  if (!(t.lr > 0.0)) doc.fail("LearningRate", "lr", "must be positive");
  require_known(doc, "LearningRate", "lr_strategy", t.lr_strategy, known_lr_strategies());
  require_known(doc, "dataset", "_name", t.dataset, known_datasets());

  auto& b = cfg.backend;
  doc.str("backend", "kind", b.kind);
  doc.real("backend", "tau", b.tau);
  doc.real("backend", "noise", b.noise);
  doc.real("backend", "base_seconds", b.base_seconds);
  doc.real("backend", "seconds_per_mac_epoch", b.seconds_per_mac_epoch);
  doc.str("backend", "table", b.table);
  doc.boolean("backend", "fallback", b.fallback);
  doc.str("backend", "command", b.command);
  doc.real("backend", "timeout", b.timeout_s);
  require_known(doc, "backend", "kind", b.kind, {"surrogate", "lookup", "command"});
  if (!(b.tau > 0.0)) doc.fail("backend", "tau", "must be positive");
  if (b.noise < 0.0 || b.noise > 1.0) doc.fail("backend", "noise", "must lie in [0, 1]");
  if (b.base_seconds < 0.0) doc.fail("backend", "base_seconds", "must be non-negative");
  if (b.seconds_per_mac_epoch < 0.0) doc.fail("backend", "seconds_per_mac_epoch", "must be non-negative");
  if (b.timeout_s < 0.0) doc.fail("backend", "timeout", "must be non-negative");
  if (b.kind == "lookup" && b.table.empty()) doc.fail("backend", "table", "required for the lookup backend");
  if (b.kind == "command" && b.command.empty()) doc.fail("backend", "command", "required for the command backend");

  doc.reject_unknown();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": file not found");
  return parse_train_config(read_file(path), path.string());
}

TrainConfig retrain_defaults(const TrainConfig& search) {
  TrainConfig out = search;
  out.trainer.total_epochs = 600;
  out.trainer.batch_size = 96;
  out.trainer.lr = 0.025;
  out.trainer.lr_strategy = "CosineAnnealingLR";
  return out;
}

// ----------------------------------------------------------------- global.ini

std::string GlobalConfig::to_ini() const {
  const auto& s = strategy;
  const auto& sp = s.space;
  std::ostringstream os;
  os << "[algorithm]\n"
     << "name = " << name << '\n'
     << "run_algorithm = " << s.strategy << '\n'
     << "max_gen = " << s.max_gen << '\n'
     << "pop_size = " << s.pop_size << '\n'
     << "\n[evolution]\n"
     << "encoding = " << scheme_name(sp.scheme) << '\n'
     << "p_c = " << shortest(s.p_c) << '\n'
     << "p_m = " << shortest(s.p_m) << '\n'
     << "tournament_size = " << s.tournament_size << '\n'
     << "sample_size = " << s.sample_size << '\n'
     << "aging_batch = " << s.aging_batch << '\n'
     << "seed = " << s.seed << '\n'
     << "\n[search]\n"
     << "stages = " << join_ints(sp.stage_nodes) << '\n'
     << "stage_channels = " << join_ints(sp.decode.stage_channels) << '\n'
     << "min_blocks = " << sp.min_blocks << '\n'
     << "max_blocks = " << sp.max_blocks << '\n'
     << "channels = " << join_ints(sp.channel_choices) << '\n'
     << "max_amount = " << sp.max_amount << '\n'
     << "min_nodes = " << sp.min_nodes << '\n'
     << "max_nodes = " << sp.max_nodes << '\n'
     << "cell_channels = " << sp.decode.cell_channels << '\n'
     << "cell_repeats = " << sp.decode.cell_repeats << '\n'
     << "\n[farm]\n"
     << "mode = " << farm.mode << '\n'
     << "slots = " << join_ints(farm.slots) << '\n'
     << "workers = " << join(farm.workers) << '\n'
     << "retries = " << farm.retries << '\n'
     << "poll_interval = " << shortest(farm.poll_interval_s) << '\n'
     << "lost_timeout = " << shortest(farm.lost_timeout_s) << '\n'
     << "cache = " << (farm.cache ? "on" : "off") << '\n'
     << "dispatch_overhead = " << shortest(farm.dispatch_overhead_s) << '\n'
     << "job_duration = " << shortest(farm.job_duration_s) << '\n'
     << "jitter = " << shortest(farm.jitter) << '\n'
     << "fault_script = " << farm.fault_script << '\n'
     << "bus = " << farm.bus << '\n'
     << "store = " << farm.store << '\n';
  return os.str();
}

GlobalConfig parse_global_config(const std::string& text, const std::string& origin) {
  IniDoc doc(text, origin);
  doc.allow_sections({"algorithm", "evolution", "search", "farm"});
  GlobalConfig cfg;
  auto& s = cfg.strategy;
  doc.str("algorithm", "name", cfg.name, true);
  doc.str("algorithm", "run_algorithm", s.strategy, true);
  doc.integer("algorithm", "max_gen", s.max_gen, true);
  doc.integer("algorithm", "pop_size", s.pop_size, true);
  if (cfg.name.find_first_of("/\\") != std::string::npos || cfg.name == "." || cfg.name == "..") {
    doc.fail("algorithm", "name", "must be a plain folder name");
  }
  require_known(doc, "algorithm", "run_algorithm", s.strategy, strategy_names());
  if (s.max_gen < 0) doc.fail("algorithm", "max_gen", "must be non-negative");
  if (s.pop_size < 2) doc.fail("algorithm", "pop_size", "must be at least 2");

  auto& sp = s.space;
  sp.scheme = default_scheme(s.strategy);
  std::string encoding(scheme_name(sp.scheme));
  doc.str("evolution", "encoding", encoding);
  try {
    sp.scheme = scheme_from_name(encoding);
  } catch (const ConfigError&) {
    doc.fail("evolution", "encoding", "unknown encoding '" + encoding + "'");
  }
  doc.real("evolution", "p_c", s.p_c);
  doc.real("evolution", "p_m", s.p_m);
  doc.integer("evolution", "tournament_size", s.tournament_size);
  doc.integer("evolution", "sample_size", s.sample_size);
  doc.integer("evolution", "aging_batch", s.aging_batch);
  doc.u64("evolution", "seed", s.seed);

  doc.int_list("search", "stages", sp.stage_nodes);
  doc.int_list("search", "stage_channels", sp.decode.stage_channels);
  doc.integer("search", "min_blocks", sp.min_blocks);
  doc.integer("search", "max_blocks", sp.max_blocks);
  doc.int_list("search", "channels", sp.channel_choices);
  doc.integer("search", "max_amount", sp.max_amount);
  doc.integer("search", "min_nodes", sp.min_nodes);
  doc.integer("search", "max_nodes", sp.max_nodes);
  doc.integer("search", "cell_channels", sp.decode.cell_channels);
  doc.integer("search", "cell_repeats", sp.decode.cell_repeats);

  auto& f = cfg.farm;
  doc.str("farm", "mode", f.mode);
  require_known(doc, "farm", "mode", f.mode, {"simulated", "local", "remote"});
  doc.int_list("farm", "slots", f.slots);
  doc.str_list("farm", "workers", f.workers);
  doc.integer("farm", "retries", f.retries);
  doc.real("farm", "poll_interval", f.poll_interval_s);
  doc.real("farm", "lost_timeout", f.lost_timeout_s);
  doc.boolean("farm", "cache", f.cache);
  doc.real("farm", "dispatch_overhead", f.dispatch_overhead_s);
  doc.real("farm", "job_duration", f.job_duration_s);
  doc.real("farm", "jitter", f.jitter);
  doc.str("farm", "fault_script", f.fault_script);
  doc.str("farm", "bus", f.bus);
  doc.str("farm", "store", f.store);
  require_known(doc, "farm", "bus", f.bus, {"memory", "file"});
  require_known(doc, "farm", "store", f.store, {"memory", "file"});
  if (f.jitter < 0.0 || f.jitter >= 1.0) doc.fail("farm", "jitter", "must lie in [0, 1)");
  if (f.retries < 0) doc.fail("farm", "retries", "must be non-negative");
  if (!(f.poll_interval_s > 0.0)) doc.fail("farm", "poll_interval", "must be positive");
  if (!(f.lost_timeout_s > 0.0)) doc.fail("farm", "lost_timeout", "must be positive");
  if (f.dispatch_overhead_s < 0.0) doc.fail("farm", "dispatch_overhead", "must be non-negative");
  if (f.job_duration_s < 0.0) doc.fail("farm", "job_duration", "must be non-negative");
  if (f.mode == "remote" && f.workers.empty()) doc.fail("farm", "workers", "required in remote mode");
  if (f.mode != "remote" && f.slots.empty()) doc.fail("farm", "slots", "must list at least one worker");

  doc.reject_unknown();
  try {
    s.check();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

GlobalConfig load_global_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path.string() + ": file not found");
  return parse_global_config(read_file(path), path.string());
}

ParsedConfigs parse_configs(const std::filesystem::path& global_path, const std::filesystem::path& train_path) {
  ParsedConfigs out{load_global_config(global_path), load_train_config(train_path)};
  const auto data = dataset_info(out.train.trainer.dataset);
  out.global.strategy.space.input = data.input;
  out.global.strategy.space.classes = data.classes;
  try {
    out.global.strategy.check();
  } catch (const ConfigError& e) {
    throw ConfigError(global_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace enasfarm
