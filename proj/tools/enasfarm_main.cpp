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


// enasfarm command line: run, simulate, worker, compare, retrain.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enasfarm/errors.hpp"
#include "enasfarm/protocol.hpp"
#include "enasfarm/report.hpp"
#include "enasfarm/session.hpp"
#include "enasfarm/util.hpp"
#include "enasfarm/worker.hpp"

namespace fs = std::filesystem;
using namespace enasfarm;

namespace {

// Exit codes.
constexpr int kFailure = 1;
constexpr int kBadConfig = 2;
constexpr int kInterrupted = 3;
constexpr int kMixed = 4;

void print_best(const Session& s, const Individual& best) {
  std::cout << "best " << best.name() << " id=" << best.id().hex() << " fit=" << best.accuracy().to_string()
            << "\n";
  const auto a = s.accounting();
  std::cout << "evaluations " << a.jobs << " attempts " << a.attempts << " failed " << a.failed << " gpu_days "
            << format_fixed(a.gpu_days(), 4) << "\n";
  std::cout << "run directory " << s.run_dir().string() << "\n";
}

int run_search(const std::string& global, const std::string& train, const std::string& root, SessionOptions opts,
               const std::string& trace) {
  Session s(global, train, root, opts);
  try {
    const auto best = s.run();
    print_best(s, best);
  } catch (const InterruptedError& e) {
    s.save_accounting();
    std::cerr << "interrupted: " << e.what() << "\nrerun the same command to resume\n";
    if (!trace.empty() && s.simulated()) write_file_atomic(trace, s.simulated()->trace_text());
    return kInterrupted;
  }
  if (!trace.empty() && s.simulated()) write_file_atomic(trace, s.simulated()->trace_text());
  return 0;
}

int serve(const std::string& listen, int slots, const WorkerBackendOptions& backend) {
  const auto [host, port] = parse_address(listen);
  // Block the signals before any thread exists so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  WorkerServer server(host, port, slots, backend);
  server.start();
  std::cout << "listening on " << server.address() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  std::cout << "stopping" << std::endl;
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary architecture search on a farm of training slots"};
  app.require_subcommand(1);

  std::string global = "global.ini", train = "train.ini", root = "runs", trace, fault_script;

  auto* run = app.add_subcommand("run", "run or resume a search as configured");
  run->add_option("-g,--global", global, "global.ini")->check(CLI::ExistingFile);
  run->add_option("-t,--train", train, "train.ini")->check(CLI::ExistingFile);
  run->add_option("-r,--root", root, "directory holding run directories");

  auto* sim = app.add_subcommand("simulate", "run or resume a search on the simulated farm");
  sim->add_option("-g,--global", global, "global.ini")->check(CLI::ExistingFile);
  sim->add_option("-t,--train", train, "train.ini")->check(CLI::ExistingFile);
  sim->add_option("-r,--root", root, "directory holding run directories");
  sim->add_option("--faults", fault_script, "fault script")->check(CLI::ExistingFile);
  sim->add_option("--trace", trace, "write the dispatch trace here");

  std::string listen = "127.0.0.1:0";
  int slots = 1;
  WorkerBackendOptions backend;
  auto* worker = app.add_subcommand("worker", "serve training slots over TCP");
  worker->add_option("-l,--listen", listen, "host:port, port 0 picks one");
  worker->add_option("-s,--slots", slots, "slots (GPUs) on this node")->check(CLI::PositiveNumber);
  worker->add_option("-b,--backend", backend.kind, "only serve this backend kind")
      ->check(CLI::IsMember({"", "surrogate", "lookup", "command"}));
  worker->add_option("--command", backend.command, "trainer command template");
  worker->add_option("--table", backend.table, "lookup table");

  std::vector<std::string> dirs;
  bool allow_mixed = false;
  std::string format = "table", output;
  auto* cmp = app.add_subcommand("compare", "tabulate finished runs");
  cmp->add_option("dirs", dirs, "run directories")->required()->check(CLI::ExistingDirectory);
  cmp->add_flag("--allow-mixed", allow_mixed, "tabulate runs with different train.ini anyway");
  cmp->add_option("-f,--format", format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  cmp->add_option("-o,--output", output, "write here instead of stdout");

  std::string run_dir;
  int epochs = 0;
  auto* re = app.add_subcommand("retrain", "retrain the best member of a finished run");
  re->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  re->add_option("-e,--epochs", epochs, "epochs (default: retrain defaults)")->check(CLI::NonNegativeNumber);
  re->add_flag("--simulate", "use the simulated farm");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_search(global, train, root, {}, "");
    if (*sim) return run_search(global, train, root, {true, fault_script}, trace);
    if (*worker) return serve(listen, slots, backend);
    if (*cmp) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      const auto report = compare(paths, allow_mixed);
      const auto text = format == "csv" ? report.csv() : report.table();
      if (output.empty()) {
        std::cout << text;
      } else {
        write_file_atomic(output, text);
      }
      return 0;
    }
    if (*re) {
      auto s = Session::open(run_dir, {re->count("--simulate") > 0, ""});
      std::optional<TrainConfig> cfg;
      if (epochs > 0) {
        cfg = retrain_defaults(s->configs().train);
        cfg->trainer.total_epochs = epochs;
      }
      const auto rec = s->retrain(cfg);
      std::cout << rec.to_string() << "\n";
      return 0;
    }
  } catch (const MixedSettingsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMixed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
