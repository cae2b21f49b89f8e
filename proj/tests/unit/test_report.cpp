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

#include <regex>

#include "enasfarm/errors.hpp"
#include "enasfarm/report.hpp"
#include "enasfarm/session.hpp"
#include "fixtures.hpp"
#include "temp_dir.hpp"

namespace enasfarm {
namespace {

namespace fs = std::filesystem;
using testing::RunSpec;

struct Crash {};

class ReportTest : public ::testing::Test {
 protected:
  // A finished run in root/<name>.
  fs::path finished(const std::string& name, RunSpec spec = {}) {
    spec.name = name;
    const auto [g, t] = testing::write_configs(dir / ("cfg_" + name), spec);
    Session s(g, t, dir / "runs");
    s.run();
    return s.run_dir();
  }

  // Pins the retrain result of a finished run to `value`.
  void set_retrain(const fs::path& run, const std::string& value) {
    const auto pop = load_latest_population(run).second;
    const auto& best = pop.best();
    RetrainRecord rec{best.name(), best.id().hex(), best.accuracy(), Fitness::parse(value), 600, 1.0};
    write_file_atomic(run / "retrain.txt", rec.to_string() + "\n");
  }

  testing::TempDir dir{"report"};
};

TEST_F(ReportTest, SortsByRetrainAccuracy) {
  const auto cgp = finished("CGP-CNN");
  const auto ae = finished("AE-CNN");
  const auto none = finished("NoRetrain");
  set_retrain(cgp, "94.24");
  set_retrain(ae, "95.25");
  const std::vector<fs::path> dirs{none, cgp, ae};
  const auto report = compare(dirs);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].algorithm, "AE-CNN");
  EXPECT_EQ(report.rows[1].algorithm, "CGP-CNN");
  EXPECT_EQ(report.rows[2].algorithm, "NoRetrain");
  EXPECT_EQ(report.rows[0].retrain_acc->to_string(), "95.25");
  EXPECT_FALSE(report.rows[2].retrain_acc);
  const auto lines = split(report.csv(), '\n');
  EXPECT_EQ(lines[0], "algorithm,search_acc,retrain_acc,params,flops,gpu_days,evaluations");
  EXPECT_TRUE(starts_with(lines[1], "AE-CNN,"));
  EXPECT_NE(lines[3].find(",NA,"), std::string::npos);
}

TEST_F(ReportTest, RetrainOfAnotherMemberIsIgnored) {
  const auto run = finished("r");
  RetrainRecord rec{"indi_gen00_no00", std::string(56, 'a'), Fitness::parse("1.00"), Fitness::parse("99.00"), 600, 1};
  write_file_atomic(run / "retrain.txt", rec.to_string() + "\n");
  EXPECT_FALSE(summarize_run(run).retrain_acc);
}

TEST_F(ReportTest, GpuDaysFromSlotSeconds) {
  const auto run = finished("g");
  FarmAccounting acct;
  acct.jobs = 12;
  acct.busy_seconds = 4 * 6 * 3600.0;  // 4 slots busy for 6 h
  fs::remove(run / "farm.txt");
  write_file_atomic(run / "farm.txt", acct.serialize());
  const std::vector<fs::path> dirs{run};
  const auto r = compare(dirs);
  EXPECT_DOUBLE_EQ(r.rows[0].gpu_days, 1.0);
  EXPECT_NE(r.csv().find(",1.0000,12\n"), std::string::npos) << r.csv();
}

TEST_F(ReportTest, RowsCarryRunFacts) {
  RunSpec spec;
  spec.max_gen = 2;
  const auto run = finished("facts", spec);
  const auto row = summarize_run(run);
  const auto pop = load_latest_population(run).second;
  EXPECT_EQ(row.search_acc, pop.best().accuracy());
  EXPECT_EQ(row.evaluations, FarmAccounting::parse(read_file(run / "farm.txt")).jobs);
  EXPECT_GT(row.evaluations, 0);
  EXPECT_LE(row.evaluations, 8);
  EXPECT_GT(*row.params, 0);
  EXPECT_GT(*row.flops, 0);
  EXPECT_FALSE(row.partial);
}

TEST_F(ReportTest, MixedSettingsRefusedUnlessAllowed) {
  const auto a = finished("a");
  RunSpec other;
  other.epochs = 30;
  const auto b = finished("b", other);
  const std::vector<fs::path> dirs{a, b};
  EXPECT_THROW(compare(dirs), MixedSettingsError);
  const auto r = compare(dirs, true);
  EXPECT_TRUE(r.mixed);
  for (const auto& row : r.rows) EXPECT_TRUE(row.mixed);
  const auto csv = r.csv();
  EXPECT_NE(csv.find("\na*,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\nb*,"), std::string::npos) << csv;
  EXPECT_NE(r.table().find("differing train.ini"), std::string::npos);
}

TEST_F(ReportTest, CsvIsByteIdenticalAcrossRepeats) {
  const auto a = finished("a");
  const auto b = finished("b");
  const std::vector<fs::path> dirs{a, b};
  const auto first = compare(dirs).csv();
  for (int i = 0; i < 5; ++i) EXPECT_EQ(compare(dirs).csv(), first);
  // a second copy of the same runs reports the same bytes
  testing::TempDir again("report2");
  std::vector<fs::path> copies;
  for (const auto& d : dirs) {
    fs::copy(d, again / d.filename(), fs::copy_options::recursive);
    copies.push_back(again / d.filename());
  }
  EXPECT_EQ(compare(copies).csv(), first);
  const std::regex row(R"(^[ab],\d{1,3}\.\d{2},NA,\d+,\d+,\d+\.\d{4},\d+$)");
  const auto lines = split(first, '\n');
  EXPECT_TRUE(std::regex_match(lines[1], row)) << lines[1];
  EXPECT_TRUE(std::regex_match(lines[2], row)) << lines[2];
}

TEST_F(ReportTest, PartialRunsAreMarkedNotFabricated) {
  RunSpec spec;
  spec.name = "crashed";
  spec.max_gen = 3;
  const auto [g, t] = testing::write_configs(dir / "cfg_c", spec);
  fs::path run;
  {
    Session s(g, t, dir / "runs");
    run = s.run_dir();
    RunnerHooks hooks;
    hooks.after_save = [](int gen) {
      if (gen == 1) throw Crash{};
    };
    EXPECT_THROW(s.run(hooks), Crash);
  }
  auto row = summarize_run(run);
  EXPECT_TRUE(row.partial);
  EXPECT_EQ(row.search_acc, load_population(population_log_path(run, 1), 1).best().accuracy());
  EXPECT_FALSE(row.retrain_acc);
  const std::vector<fs::path> dirs{run};
  EXPECT_NE(compare(dirs).csv().find("\ncrashed (partial),"), std::string::npos);

  spec.name = "empty";
  const auto [g2, t2] = testing::write_configs(dir / "cfg_e", spec);
  {
    Session s(g2, t2, dir / "runs");
    run = s.run_dir();
    RunnerHooks hooks;
    hooks.before_save = [](int) { throw Crash{}; };
    EXPECT_THROW(s.run(hooks), Crash);
  }
  row = summarize_run(run);
  EXPECT_TRUE(row.partial);
  EXPECT_FALSE(row.search_acc);
  EXPECT_FALSE(row.params);
  EXPECT_THROW(summarize_run(dir / "nowhere"), ReportError);
}

TEST_F(ReportTest, RetrainBestUsesLongerSchedule) {
  RunSpec spec;
  spec.name = "rt";
  const auto [g, t] = testing::write_configs(dir / "cfg", spec);
  Session s(g, t, dir / "runs");
  const auto best = s.run();
  const auto rec = s.retrain();
  EXPECT_EQ(rec.name, best.name());
  EXPECT_EQ(rec.id, best.id().hex());
  EXPECT_EQ(rec.epochs, 600);
  EXPECT_EQ(rec.search, best.accuracy());
  EXPECT_GE(rec.retrain, rec.search);
  EXPECT_EQ(RetrainRecord::parse(read_file(s.run_dir() / "retrain.txt")).retrain, rec.retrain);
  EXPECT_EQ(summarize_run(s.run_dir()).retrain_acc, rec.retrain);
  // the retrain job stays out of the search cache
  EXPECT_EQ(s.cache().lookup(best.id()), best.accuracy());
}

TEST_F(ReportTest, RetrainNeedsAFinishedRun) {
  RunSpec spec;
  spec.name = "unfinished";
  const auto [g, t] = testing::write_configs(dir / "cfg", spec);
  Session s(g, t, dir / "runs");
  EXPECT_THROW(s.retrain(), ReportError);  // nothing ran yet
  s.run();
  for (const int gen : list_generations(s.run_dir())) fs::remove(population_log_path(s.run_dir(), gen));
  EXPECT_THROW(s.retrain(), ReportError);
}

TEST(RetrainRecord, RoundTrip) {
  RetrainRecord rec{"indi_gen04_no01", std::string(56, 'c'), Fitness::parse("82.61"), Fitness::parse("90.00"), 600,
                    12.5};
  EXPECT_EQ(rec.to_string(),
            "name=indi_gen04_no01;id=" + std::string(56, 'c') + ";search=82.61;retrain=90.00;epochs=600;duration=12.500");
  const auto back = RetrainRecord::parse(rec.to_string());
  EXPECT_EQ(back.retrain, rec.retrain);
  EXPECT_EQ(back.epochs, 600);
  EXPECT_THROW(RetrainRecord::parse("name=x"), ReportError);
}

}  // namespace
}  // namespace enasfarm
