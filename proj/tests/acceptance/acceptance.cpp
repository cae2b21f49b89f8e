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


// One line per acceptance criterion; exits non-zero if any fails.

#include <sys/wait.h>

#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "enasfarm/cache.hpp"
#include "enasfarm/errors.hpp"
#include "enasfarm/evaluator.hpp"
#include "enasfarm/operators.hpp"
#include "enasfarm/report.hpp"
#include "enasfarm/runner.hpp"
#include "enasfarm/session.hpp"
#include "enasfarm/sim_farm.hpp"
#include "enasfarm/slot_store.hpp"
#include "enasfarm/worker.hpp"
#include "fixtures.hpp"
#include "jobs.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace enasfarm;
using testing::RunSpec;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

/// Collects the first few mismatches of a check.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Verdict verdict(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " mismatch(es): " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::map<std::string, std::string> run_logs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (starts_with(name, "begin_")) out[name] = read_file(e.path());
  }
  return out;
}

// ------------------------------------------------------------------ 1

Verdict budget_fidelity() {
  testing::TempDir dir("acc1");
  RunSpec spec;
  spec.pop_size = 20;
  spec.max_gen = 20;
  spec.farm = "mode = simulated\nslots = 4\ncache = false\n";
  const auto [g, t] = testing::write_configs(dir / "cfg", spec);
  const auto t0 = std::chrono::steady_clock::now();
  Session s(g, t, dir / "runs");
  s.run();
  const double secs = seconds_since(t0);
  const auto jobs = s.executor().accounting().jobs;
  Checks c;
  c.expect(jobs == 400, "backend jobs " + std::to_string(jobs));
  c.expect(s.evaluator().stats().jobs == 400, "evaluator jobs " + std::to_string(s.evaluator().stats().jobs));
  c.expect(secs < 10.0, "took " + fixed(secs, 2) + " s");
  return c.verdict(std::to_string(jobs) + " backend jobs in " + fixed(secs, 2) + " s");
}

// ------------------------------------------------------------------ 2

/// Forwards to a farm and remembers every identifier sent to it.
class RecordingExecutor final : public JobExecutor {
 public:
  explicit RecordingExecutor(JobExecutor& inner) : inner_(inner) {}
  std::vector<JobOutcome> execute(std::span<const JobSpec> jobs) override {
    for (const auto& j : jobs) ids.push_back(j.id.hex());
    return inner_.execute(jobs);
  }
  FarmAccounting accounting() const override { return inner_.accounting(); }
  RecordBus& bus() override { return inner_.bus(); }
  std::vector<std::string> ids;

 private:
  JobExecutor& inner_;
};

struct ManualRun {
  std::vector<std::string> ids;
  std::string final_log;
};

ManualRun manual_run(const fs::path& dir, const StrategyConfig& cfg, bool use_cache) {
  InProcessBus bus;
  SimulatedFarm farm(SimFarmSpec{}, bus);
  RecordingExecutor rec(farm);
  TrainConfig train;
  FitnessCache cache(dir / "cache.txt", train.digest());
  Listener listener(bus, &cache, ListenerPaths::in(dir));
  EvaluatorOptions o;
  o.train = train;
  o.seed = cfg.seed;
  o.use_cache = use_cache;
  Evaluator eval(o, rec, cache, listener);
  Runner runner(dir, cfg, eval);
  runner.run();
  return {rec.ids, format_population(runner.population())};
}

Verdict cache_effectiveness() {
  testing::TempDir dir("acc2");
  StrategyConfig cfg;
  cfg.strategy = "elitist_ga";
  cfg.pop_size = 20;
  cfg.max_gen = 20;
  cfg.p_c = 0.9;
  cfg.p_m = 0.01;
  cfg.tournament_size = 4;
  cfg.seed = 3;
  // Without the cache every member is a job; its ids give the oracle.
  const auto all = manual_run(dir / "nocache", cfg, false);
  const std::set<std::string> distinct(all.ids.begin(), all.ids.end());
  const auto cached = manual_run(dir / "cache", cfg, true);
  const std::set<std::string> sent(cached.ids.begin(), cached.ids.end());
  const double dup = 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(all.ids.size());
  Checks c;
  c.expect(all.ids.size() == 400, "uncached run issued " + std::to_string(all.ids.size()) + " jobs");
  c.expect(dup >= 0.30, "duplicate share only " + fixed(dup, 3));
  c.expect(cached.ids.size() == distinct.size(),
           "jobs " + std::to_string(cached.ids.size()) + " vs distinct " + std::to_string(distinct.size()));
  c.expect(sent == distinct, "identifier sets differ");
  c.expect(distinct.size() < 400, "no duplicates at all");
  c.expect(cached.final_log == all.final_log, "cached run took a different trajectory");
  return c.verdict(std::to_string(cached.ids.size()) + " jobs == " + std::to_string(distinct.size()) +
                   " distinct ids of 400 members (" + fixed(100 * dup, 1) + "% duplicates)");
}

// ------------------------------------------------------------------ 3

struct Crash {};

Verdict restart_equivalence() {
  testing::TempDir dir("acc3");
  RunSpec spec;
  spec.pop_size = 4;
  spec.max_gen = 5;
  const auto [g, t] = testing::write_configs(dir / "cfg", spec);
  std::map<std::string, std::string> reference;
  {
    Session ref(g, t, dir / "ref");
    ref.run();
    reference = run_logs(ref.run_dir());
  }
  Checks c;
  int points = 0;
  for (const bool before : {false, true}) {
    for (int crash_t = 0; crash_t < spec.max_gen; ++crash_t) {
      ++points;
      fs::path run_dir;
      {
        Session s(g, t, dir / ("crash" + std::to_string(points)));
        run_dir = s.run_dir();
        RunnerHooks hooks;
        auto boom = [crash_t](int gen) {
          if (gen == crash_t) throw Crash{};
        };
        (before ? hooks.before_save : hooks.after_save) = boom;
        bool crashed = false;
        try {
          s.run(hooks);
        } catch (const Crash&) {
          crashed = true;
        }
        c.expect(crashed, "no crash at t=" + std::to_string(crash_t));
      }
      Session::open(run_dir)->run();
      const auto logs = run_logs(run_dir);
      const std::string label = std::string(before ? "before" : "after") + " save t=" + std::to_string(crash_t);
      c.expect(logs.size() == reference.size(), label + ": log count");
      c.expect(logs.count("begin_4.txt") && logs.at("begin_4.txt") == reference.at("begin_4.txt"),
               label + ": final log differs");
      c.expect(logs == reference, label + ": some log differs");
    }
  }
  return c.verdict(std::to_string(points) + " crash points of a 4x5 run resume byte-identical");
}

// ------------------------------------------------------------------ 4

double sim_makespan(int jobs, double overhead) {
  InProcessBus bus;
  SimFarmSpec spec;
  spec.workers = {{"sim0", 4}};
  spec.job_duration_s = 1.0;
  spec.dispatch_overhead_s = overhead;
  SimulatedFarm farm(spec, bus);
  farm.execute(testing::sample_jobs(jobs));
  return farm.now();
}

Verdict parallel_makespan() {
  Checks c;
  const double ten = sim_makespan(10, 0.0);
  const double eight = sim_makespan(8, 0.0);
  const double ten_o = sim_makespan(10, 0.02);
  const double eight_o = sim_makespan(8, 0.02);
  c.expect(ten == 3.0, "10 jobs took " + fixed(ten, 6));
  c.expect(eight == 2.0, "8 jobs took " + fixed(eight, 6));
  c.expect(std::abs(ten_o - 3.0) / 3.0 <= 0.05, "10 jobs with overhead took " + fixed(ten_o, 6));
  c.expect(std::abs(eight_o - 2.0) / 2.0 <= 0.05, "8 jobs with overhead took " + fixed(eight_o, 6));
  return c.verdict("10 jobs " + fixed(ten, 2) + " s, 8 jobs " + fixed(eight, 2) + " s; with 0.02 s overhead " +
                   fixed(ten_o, 2) + " s and " + fixed(eight_o, 2) + " s");
}

// ------------------------------------------------------------------ 5

Verdict slot_mutual_exclusion() {
  constexpr int kThreads = 100, kSlots = 10, kRounds = 1000;
  InMemorySlotStore store;
  store.add_node("n", kSlots);
  std::vector<std::optional<SlotKey>> got(kThreads);
  int bad_rounds = 0, double_grants = 0, rounds = 0;
  std::barrier sync(kThreads, [&]() noexcept {
    std::set<int> taken;
    int wins = 0;
    for (auto& k : got) {
      if (!k) continue;
      ++wins;
      if (!taken.insert(k->slot).second) ++double_grants;
    }
    if (wins != kSlots) ++bad_rounds;
    for (const auto& s : store.snapshot()) store.release({s.node, s.slot});
    ++rounds;
  });
  std::vector<std::thread> threads;
  for (int i = 0; i < kThreads; ++i) {
    threads.emplace_back([&, i] {
      for (int r = 0; r < kRounds; ++r) {
        got[static_cast<std::size_t>(i)] = store.acquire("job" + std::to_string(i));
        sync.arrive_and_wait();
      }
    });
  }
  for (auto& t : threads) t.join();
  Checks c;
  c.expect(rounds == kRounds, "rounds " + std::to_string(rounds));
  c.expect(bad_rounds == 0, std::to_string(bad_rounds) + " rounds granted other than 10");
  c.expect(double_grants == 0, std::to_string(double_grants) + " double grants");
  return c.verdict("1000 rounds of 100 acquisitions on 10 slots: 10 grants each, 0 double grants");
}

// ------------------------------------------------------------------ 6

Verdict cache_format() {
  testing::TempDir dir("acc6");
  const auto path = dir / "cache.txt";
  {
    FitnessCache cache(path, TrainConfig{}.digest());
    for (int i = 0; i < 10000; ++i) {
      cache.insert(Identifier(sha224_hex("synthetic " + std::to_string(i))), Fitness::from_centi((i * 7919) % 10001));
    }
  }
  const auto size = fs::file_size(path);
  const std::regex line_re(R"(^[0-9a-f]{56} = \d{1,3}\.\d{2}$)");
  Checks c;
  int entries = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    if (line.empty() || line[0] == '#') continue;
    ++entries;
    c.expect(std::regex_match(line, line_re), "bad line '" + line + "'");
  }
  c.expect(entries == 10000, std::to_string(entries) + " entries");
  c.expect(size < 1000000, std::to_string(size) + " bytes");
  return c.verdict("10000 entries in " + std::to_string(size) + " bytes, every line well-formed");
}

// ------------------------------------------------------------------ 7

Individual scored(const std::string& name, int centi, std::int64_t params) {
  Individual ind(name, Genotype(FixedBinaryGenes{{2}, {0}}), 0);
  ind.set_fitness({Fitness::from_centi(centi), params});
  return ind;
}

std::set<std::string> names(const Population& p) {
  std::set<std::string> out;
  for (const auto& m : p.members) out.insert(m.name());
  return out;
}

Verdict multi_objective_oracle() {
  std::mt19937_64 rng(7);
  int agree = 0;
  Checks c;
  for (int trial = 0; trial < 200; ++trial) {
    const auto capacity = static_cast<std::size_t>(2 + rng() % 29);
    const auto offspring = static_cast<std::size_t>(1 + rng() % (60 - capacity));
    std::vector<std::tuple<int, std::int64_t, std::string>> pool;
    Population parents{0, {}};
    std::vector<Individual> q;
    for (std::size_t i = 0; i < capacity + offspring; ++i) {
      // small ranges so ties and duplicate points occur
      const int acc = static_cast<int>(rng() % 40) * 25;
      const auto params = static_cast<std::int64_t>(rng() % 40) * 1000;
      const std::string name = "p" + std::to_string(1000 + i);
      pool.emplace_back(acc, params, name);
      (i < capacity ? parents.members : q).push_back(scored(name, acc, params));
    }
    const bool same = names(crowding_select(parents, q, capacity)) == testing::crowding_oracle(pool, capacity);
    agree += same;
    c.expect(same, "trial " + std::to_string(trial));
  }
  return c.verdict(std::to_string(agree) + "/200 pools match the brute-force oracle");
}

// ------------------------------------------------------------------ 8

Population pop_of(const std::vector<int>& centis) {
  Population p;
  for (std::size_t i = 0; i < centis.size(); ++i) p.members.push_back(scored("m" + std::to_string(i), centis[i], 0));
  return p;
}

Verdict selection_statistics() {
  Checks c;
  double worst_roulette = 0.0;
  for (const auto& centis : std::vector<std::vector<int>>{{1000, 2000, 3000, 4000}, {9999, 1, 500, 0, 2500, 7000}}) {
    const auto p = pop_of(centis);
    const double total = std::accumulate(centis.begin(), centis.end(), 0.0);
    std::vector<int> hits(centis.size(), 0);
    Rng rng(2024);
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) ++hits[roulette_select(p, rng)];
    for (std::size_t i = 0; i < centis.size(); ++i) {
      const double gap = std::abs(hits[i] / static_cast<double>(kDraws) - centis[i] / total);
      worst_roulette = std::max(worst_roulette, gap);
      c.expect(gap <= 0.01, "roulette member " + std::to_string(i) + " off by " + fixed(gap, 4));
    }
  }
  const std::vector<int> centis{500, 4100, 2200, 9000, 1300, 7600, 3300, 6800, 100, 5400};
  const auto expected = testing::pair_win_rates(centis);
  const auto p = pop_of(centis);
  constexpr int kDraws = 100000;
  std::vector<int> wins(centis.size(), 0);
  Rng rng(77);
  for (int d = 0; d < kDraws; ++d) ++wins[tournament_select(p, 2, rng)];
  double worst_sigma = 0.0;
  for (std::size_t i = 0; i < centis.size(); ++i) {
    const double sigma = std::sqrt(kDraws * expected[i] * (1 - expected[i]));
    const double dev = std::abs(wins[i] - kDraws * expected[i]);
    if (sigma > 0) worst_sigma = std::max(worst_sigma, dev / sigma);
    c.expect(dev <= 3 * sigma + 1e-9, "tournament member " + std::to_string(i) + " off by " + fixed(dev / sigma, 2) + " sigma");
  }
  return c.verdict("roulette max gap " + fixed(worst_roulette, 4) + ", tournament max deviation " +
                   fixed(worst_sigma, 2) + " sigma");
}

// ------------------------------------------------------------------ 9

Verdict aging_semantics() {
  SearchSpace space;
  Rng rng(4);
  Population pop{0, {}};
  std::deque<std::string> queue;
  for (int i = 0; i < 10; ++i) {
    Individual ind("a" + std::to_string(i), space.sample(rng), 0);
    ind.set_fitness({Fitness::from_centi(i == 0 ? 9999 : 1000 + i), 0});  // oldest is the global best
    pop.members.push_back(ind);
    queue.push_back(ind.name());
  }
  int counter = 0;
  const EvaluateFn evaluate = [&](Individual& child) { child.set_fitness({Fitness::from_centi(500 + counter), 0}); };
  Checks c;
  bool best_removed = false;
  for (int step = 0; step < 100; ++step) {
    const auto before = names(pop);
    const std::string child = "c" + std::to_string(step);
    aging_step(pop, 3, 0.3, space, rng, evaluate, child);
    ++counter;
    const auto after = names(pop);
    std::vector<std::string> removed;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(removed));
    c.expect(removed.size() == 1 && removed.front() == queue.front(), "step " + std::to_string(step));
    best_removed = best_removed || (!removed.empty() && removed.front() == "a0");
    queue.pop_front();
    queue.push_back(child);
    c.expect(pop.size() == 10, "size changed at step " + std::to_string(step));
  }
  c.expect(best_removed, "the global best was never removed");
  return c.verdict("100 steps each removed the then-oldest member, the global best included");
}

// ----------------------------------------------------------------- 10

Verdict counting_math() {
  Checks c;
  ArchIR conv;
  conv.input = {3, 32, 32};
  conv.add(0, ConvLayer{3, 3, 64, 1, true});
  ArchIR dense;
  dense.input = {128, 1, 1};
  dense.add(0, DenseLayer{128, 10, true});
  c.expect(param_count(conv) == 1792, "conv params " + std::to_string(param_count(conv)));
  c.expect(flop_count(conv) == 1769472, "conv MACs " + std::to_string(flop_count(conv)));
  c.expect(param_count(dense) == 1290, "dense params " + std::to_string(param_count(dense)));
  std::mt19937_64 rng(2026);
  int matched = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = testing::random_ir(rng);
    const bool ok = param_count(t.ir) == t.params && flop_count(t.ir) == t.macs;
    matched += ok;
    c.expect(ok, "random IR " + std::to_string(trial));
  }
  return c.verdict("spot values 1792 / 1290 / 1769472; " + std::to_string(matched) + "/1000 random IRs tabulate exactly");
}

// ----------------------------------------------------------------- 11

Verdict external_trainer() {
  testing::TempDir dir("acc11");
  const std::string toy = "python3 " + testing::toy_trainer().string() +
                          " --payload {payload_path} --settings {settings_path} --seed {seed}";
  WorkerBackendOptions opts{"command", toy, ""};
  WorkerServer a("127.0.0.1", 0, 2, opts);
  WorkerServer b("127.0.0.1", 0, 2, opts);
  a.start();
  b.start();

  RunSpec spec;
  spec.pop_size = 4;
  spec.max_gen = 3;
  spec.backend = "kind = surrogate\ntau = 20\nnoise = 0.03\n";
  const auto [g_ref, t_ref] = testing::write_configs(dir / "ref_cfg", spec);
  Session ref(g_ref, t_ref, dir / "ref");
  ref.run();

  spec.farm = "mode = remote\nworkers = " + a.address() + ", " + b.address() +
              "\npoll_interval = 0.2\nlost_timeout = 10\nretries = 0\n";
  spec.backend = "kind = command\ntau = 20\nnoise = 0.03\ntimeout = 120\ncommand = " + toy + "\n";
  const auto [g, t] = testing::write_configs(dir / "remote_cfg", spec);
  Session remote(g, t, dir / "remote");
  remote.run();
  a.stop();
  b.stop();

  Checks c;
  const auto want = run_logs(ref.run_dir());
  const auto got = run_logs(remote.run_dir());
  c.expect(got.size() == 3, std::to_string(got.size()) + " population logs");
  int compared = 0;
  for (const auto& [name, text] : want) {
    c.expect(got.count(name) && got.at(name) == text, name + " differs");
    const auto pop_ref = load_population(ref.run_dir() / name, 0);
    const auto pop_rem = load_population(remote.run_dir() / name, 0);
    for (std::size_t i = 0; i < std::min(pop_ref.size(), pop_rem.size()); ++i) {
      ++compared;
      c.expect(pop_ref.members[i].accuracy() == pop_rem.members[i].accuracy(),
               name + " member " + std::to_string(i) + ": " + pop_ref.members[i].accuracy().to_string() + " vs " +
                   pop_rem.members[i].accuracy().to_string());
    }
  }
  const auto jobs = remote.executor().accounting().jobs;
  c.expect(remote.executor().accounting().failed == 0, "failed trainer jobs");
  // epoch lines streamed back from the toy trainer through the agents
  c.expect(read_file(remote.run_dir() / "run.log").find("] epoch 50 acc ") != std::string::npos,
           "trainer output missing");
  return c.verdict("4x3 run over 2 loopback agents (" + std::to_string(jobs) + " toy-trainer jobs): " +
                   std::to_string(compared) + " logged fitness values equal the in-process surrogate");
}

// ----------------------------------------------------------------- 12

struct Exec {
  int code = -1;
  std::string out;
};

Exec run_cli(const std::string& args) {
  Exec e;
#ifdef ENASFARM_CLI_PATH
  const std::string cmd = std::string("'") + ENASFARM_CLI_PATH + "' " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return e;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, p)) e.out.append(buf, n);
  const int status = ::pclose(p);
  e.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  (void)args;
#endif
  return e;
}

Verdict fairness_guard() {
  testing::TempDir dir("acc12");
  auto finished = [&](const std::string& name, int epochs) {
    RunSpec spec;
    spec.name = name;
    spec.epochs = epochs;
    const auto [g, t] = testing::write_configs(dir / ("cfg_" + name), spec);
    Session s(g, t, dir / "runs");
    s.run();
    return s.run_dir();
  };
  const auto a = finished("alpha", 50);
  const auto b = finished("beta", 50);
  const auto m = finished("mixed", 30);
  Checks c;

  bool refused = false;
  try {
    const std::vector<fs::path> dirs{a, m};
    compare(dirs);
  } catch (const MixedSettingsError&) {
    refused = true;
  }
  c.expect(refused, "library compare accepted mixed settings");
  const std::vector<fs::path> mixed_dirs{a, m};
  const auto allowed = compare(mixed_dirs, true);
  c.expect(allowed.mixed && allowed.rows.size() == 2 && allowed.rows[0].mixed && allowed.rows[1].mixed,
           "override did not flag the rows");

  const std::vector<fs::path> same{a, b};
  const std::string csv = compare(same).csv();
  c.expect(starts_with(csv, "algorithm,search_acc,retrain_acc,params,flops,gpu_days,evaluations\n"), "csv header");
  for (int i = 0; i < 3; ++i) c.expect(compare(same).csv() == csv, "library csv changed on repeat");

  std::string cli_note = "CLI not built";
#ifdef ENASFARM_CLI_PATH
  const auto refuse = run_cli("compare '" + a.string() + "' '" + m.string() + "' -f csv");
  c.expect(refuse.code == 4, "mixed compare exited " + std::to_string(refuse.code));
  c.expect(refuse.out.find("refusing to compare") != std::string::npos, "no refusal message");
  const auto over = run_cli("compare '" + a.string() + "' '" + m.string() + "' -f csv --allow-mixed");
  c.expect(over.code == 0, "overridden compare exited " + std::to_string(over.code));
  const auto first = run_cli("compare '" + a.string() + "' '" + b.string() + "' -f csv");
  c.expect(first.code == 0, "compare exited " + std::to_string(first.code));
  c.expect(first.out == csv, "CLI csv differs from library csv");
  for (int i = 0; i < 3; ++i) c.expect(run_cli("compare '" + a.string() + "' '" + b.string() + "' -f csv").out == first.out, "CLI csv changed on repeat");
  cli_note = "CLI exit " + std::to_string(refuse.code) + " on mixed digests, 0 with --allow-mixed";
#endif
  return c.verdict("mixed digests refused (" + cli_note + "); identical digests give byte-identical CSV");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"budget fidelity", budget_fidelity},
      {"cache effectiveness", cache_effectiveness},
      {"restart equivalence", restart_equivalence},
      {"parallel makespan", parallel_makespan},
      {"slot mutual exclusion", slot_mutual_exclusion},
      {"cache file format and size", cache_format},
      {"multi-objective oracle", multi_objective_oracle},
      {"selection statistics", selection_statistics},
      {"aging semantics", aging_semantics},
      {"counting math", counting_math},
      {"end-to-end external trainer", external_trainer},
      {"fairness guard", fairness_guard},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << (i + 1) << " " << criteria[i].first << ": " << (v.pass ? "PASS" : "FAIL") << " - "
              << v.detail << " [" << fixed(seconds_since(t0), 2) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
