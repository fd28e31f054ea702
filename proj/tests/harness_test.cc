// Copyright 2026 The UDC Authors
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

#include "udc/harness.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "udc/error.h"

namespace udc {
namespace {

int CountLines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

std::string FirstLine(const std::string& s) { return s.substr(0, s.find('\n')); }

int CountFields(const std::string& line) {
  return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
}

class HarnessTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    PipelineConfig cfg;
    cfg.ensemble.members = 2;
    cfg.ensemble.train.epochs = 5;
    cal_ = new CalibrationSet();
    models_ = new Models(BuildModels(cfg, 3, cal_));
  }
  static void TearDownTestSuite() {
    delete models_;
    delete cal_;
  }
  static Models* models_;
  static CalibrationSet* cal_;
};

Models* HarnessTest::models_ = nullptr;
CalibrationSet* HarnessTest::cal_ = nullptr;

TEST_F(HarnessTest, ModelsAreCalibrated) {
  EXPECT_TRUE(models_->ens.tau_epis.has_value());
  EXPECT_GT(models_->alea.tau_alea, 0.0);
  EXPECT_EQ(models_->alea.mask, ActiveMask());
  EXPECT_EQ(cal_->size(), 50 * models_->plant.params().horizon);
}

TEST_F(HarnessTest, SmokeGridRatesInRange) {
  const GridSpec grid = MainGrid(DefaultSensorSigma(), 0.3, 5, 10);
  const ResultTable table = RunExperiment(*models_, grid, 1, 2);
  ASSERT_EQ(table.rows.size(), 4u * 5u);
  for (const ResultRow& r : table.rows) {
    EXPECT_EQ(r.episodes, 10);
    for (double v : {r.success_rate, r.alea_rate.mean, r.epis_rate.mean,
                     r.recovery_rate, r.dampen_rate, r.ci.low, r.ci.high}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(r.ci.low, r.success_rate);
    EXPECT_GE(r.ci.high, r.success_rate);
    EXPECT_DOUBLE_EQ(r.success_rate, r.successes / 10.0);
  }
}

TEST_F(HarnessTest, VanillaNominalSucceeds) {
  GridSpec grid;
  grid.conditions = {StandardConditions(DefaultSensorSigma())[0]};
  grid.controllers = {{ControllerKind::kVanilla, 0.3, 5}};
  grid.episodes = 200;
  const ResultTable table = RunExperiment(*models_, grid, 4, 1);
  EXPECT_GE(table.rows[0].success_rate, 0.99);
}

TEST_F(HarnessTest, NominalAleatoricRateNearComplement) {
  GridSpec grid;
  grid.conditions = {StandardConditions(DefaultSensorSigma())[0]};
  grid.controllers = {{ControllerKind::kVanilla, 0.3, 5}};
  grid.episodes = 25;  // 5,000 steps
  std::vector<EpisodeRecord> records;
  RunExperiment(*models_, grid, 8, 1, &records);
  int fired = 0, steps = 0;
  for (const EpisodeRecord& r : records) {
    fired += r.alea_count;
    steps += r.num_steps;
  }
  EXPECT_EQ(steps, 5000);
  EXPECT_NEAR(static_cast<double>(fired) / steps, 0.05, 0.02);
}

TEST_F(HarnessTest, CsvIsByteIdenticalAcrossRunsAndWorkers) {
  const GridSpec grid = MainGrid(DefaultSensorSigma(), 0.3, 5, 6);
  std::string csv[3];
  std::string rec[3];
  const int workers[3] = {1, 1, 4};
  for (int i = 0; i < 3; ++i) {
    std::vector<EpisodeRecord> records;
    const ResultTable t = RunExperiment(*models_, grid, 21, workers[i], &records);
    std::ostringstream a, b;
    WriteResultsCsv(t, a);
    WriteRecordsCsv(grid.experiment, records, b);
    csv[i] = a.str();
    rec[i] = b.str();
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(csv[0], csv[2]);
  EXPECT_EQ(rec[0], rec[2]);
  EXPECT_EQ(CountFields(FirstLine(csv[0])), 24);
  EXPECT_EQ(CountLines(csv[0]), 1 + 20);
  EXPECT_EQ(CountLines(rec[0]), 1 + 4 * 5 * 6);
}

TEST_F(HarnessTest, ControllersShareEpisodeSeeds) {
  const GridSpec grid = MainGrid(DefaultSensorSigma(), 0.3, 5, 4);
  std::vector<EpisodeRecord> records;
  RunExperiment(*models_, grid, 5, 1, &records);
  for (const EpisodeRecord& r : records) {
    EXPECT_EQ(r.seed, EpisodeSeed(5, r.condition_index, r.episode));
  }
}

TEST_F(HarnessTest, AggregateIsOrderIndependent) {
  const GridSpec grid = MainGrid(DefaultSensorSigma(), 0.3, 5, 5);
  std::vector<EpisodeRecord> records;
  const ResultTable direct = RunExperiment(*models_, grid, 6, 1, &records);
  std::shuffle(records.begin(), records.end(), std::mt19937_64(1));
  // Regroup by cell; episode order inside a cell stays shuffled.
  std::vector<EpisodeRecord> ordered;
  for (size_t ci = 0; ci < grid.conditions.size(); ++ci) {
    for (const auto& ctl : grid.controllers) {
      for (const EpisodeRecord& r : records) {
        if (r.kind == ctl.kind && r.condition_index == static_cast<int>(ci)) {
          ordered.push_back(r);
        }
      }
    }
  }
  const ResultTable again = Aggregate(grid.experiment, grid.conditions, ordered,
                                      grid.baseline);
  std::ostringstream a, b;
  WriteResultsCsv(direct, a);
  WriteResultsCsv(again, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(HarnessTest, DeltaMatchesWaldOracle) {
  const GridSpec grid = MainGrid(DefaultSensorSigma(), 0.3, 5, 20);
  const ResultTable t = RunExperiment(*models_, grid, 7, 2);
  for (const std::string cond : {"sensor", "compound"}) {
    const ResultRow* dec = t.Find("decomposed", cond);
    const ResultRow* tot = t.Find("total_u", cond);
    ASSERT_NE(dec, nullptr);
    ASSERT_NE(tot, nullptr);
    ASSERT_TRUE(dec->delta.has_value());
    EXPECT_DOUBLE_EQ(*dec->delta, dec->success_rate - tot->success_rate);
    const Interval oracle = DifferenceInterval(dec->successes, dec->episodes,
                                               tot->successes, tot->episodes);
    EXPECT_DOUBLE_EQ(dec->delta_ci->low, oracle.low);
    EXPECT_DOUBLE_EQ(dec->delta_ci->high, oracle.high);
    EXPECT_EQ(dec->baseline, "total_u");
  }
  EXPECT_FALSE(t.Find("total_u", "sensor")->delta.has_value());
}

TEST_F(HarnessTest, AlphaSweepEchoesAlpha) {
  const std::vector<double> alphas = DefaultAlphas();
  ASSERT_EQ(alphas, std::vector<double>({0.15, 0.30, 0.50}));
  const GridSpec grid = AlphaSweepGrid(DefaultSensorSigma(), alphas, 3);
  const ResultTable t = RunExperiment(*models_, grid, 8, 2);
  for (double a : alphas) {
    EXPECT_NE(t.Find("decomposed", "sensor", a), nullptr);
    EXPECT_NE(t.Find("total_u", "compound", a), nullptr);
  }
  std::ostringstream out;
  WriteResultsCsv(t, out);
  EXPECT_NE(out.str().find(",sensor,0.15,"), std::string::npos);
  EXPECT_NE(out.str().find(",compound,0.50,"), std::string::npos);
}

TEST_F(HarnessTest, ShiftSweepHasEveryShift) {
  const GridSpec grid = ShiftSweepGrid(DefaultSensorSigma(), 0.3, 5, 2);
  const ResultTable t = RunExperiment(*models_, grid, 9, 2);
  for (const char* s : {"mass_1.5x", "mass_2x", "friction_0.5x",
                        "friction_1.5x"}) {
    for (const char* kind : {"dynamics/", "compound/"}) {
      for (ControllerKind k : AllControllerKinds()) {
        EXPECT_NE(t.Find(ControllerName(k), std::string(kind) + s), nullptr)
            << kind << s;
      }
    }
  }
}

TEST_F(HarnessTest, TrajectoryCsvHasOneRowPerStep) {
  std::vector<TrajectoryRow> rows;
  const Condition c = StandardConditions(DefaultSensorSigma())[3];
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kDecomposed;
  const EpisodeRecord r = RunEpisode(*models_, c, cfg, 10, true, &rows);
  EXPECT_EQ(static_cast<int>(rows.size()), r.num_steps);
  EXPECT_EQ(static_cast<int>(r.steps.size()), r.num_steps);
  std::ostringstream out;
  WriteTrajectoryCsv(rows, out);
  EXPECT_EQ(CountLines(out.str()), 1 + r.num_steps);
  EXPECT_EQ(CountFields(FirstLine(out.str())), 11 + 2 * kObsDim + 12);
  int dampen = 0;
  for (const StepSummary& s : r.steps) dampen += s.dampen;
  EXPECT_EQ(dampen, r.dampen_count);
}

TEST_F(HarnessTest, PipelineCalibrationMatchesBuild) {
  const CalibrationSet again = PipelineCalibrationSet(PipelineConfig(), 3);
  ASSERT_EQ(again.size(), cal_->size());
  EXPECT_EQ(again.transitions.back().next_obs, cal_->transitions.back().next_obs);
  const AleatoricModel alea = FitAleatoric(again, ActiveMask());
  EXPECT_EQ(alea.tau_alea, models_->alea.tau_alea);
}

TEST_F(HarnessTest, CalibrationSetIsDeterministic) {
  const CalibrationSet a =
      CollectCalibrationSet(models_->plant, models_->policy, 3, 77);
  const CalibrationSet b =
      CollectCalibrationSet(models_->plant, models_->policy, 3, 77);
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.transitions[i].next_obs, b.transitions[i].next_obs);
  }
  // Nominal sensors: the goal component never moves.
  for (const Transition& t : a.transitions) {
    EXPECT_EQ(t.obs(kGoalHeight), t.next_obs(kGoalHeight));
  }
}

TEST(EpisodeSeedTest, PairwiseDistinct) {
  std::set<uint64_t> seen;
  for (int c = 0; c < 8; ++c) {
    for (int e = 0; e < 1000; ++e) seen.insert(EpisodeSeed(42, c, e));
  }
  EXPECT_EQ(seen.size(), 8000u);
  EXPECT_NE(EpisodeSeed(1, 0, 0), EpisodeSeed(2, 0, 0));
}

std::vector<EpisodeRecord> SyntheticRecords(int episodes, int steps,
                                            bool fired) {
  std::vector<EpisodeRecord> out;
  for (int e = 0; e < episodes; ++e) {
    EpisodeRecord r;
    r.condition = "sensor";
    r.episode = e;
    r.num_steps = steps;
    r.alea_count = fired ? steps : 0;
    r.epis_count = fired ? steps : 0;
    for (int t = 0; t < steps; ++t) {
      StepSummary s;
      s.sigma_alea = 0.1 * (t + 1) + e;
      s.sigma_epis = t == 0 ? 0.0 : -2.0 * s.sigma_alea;
      s.epis_defined = t > 0;
      r.steps.push_back(s);
    }
    out.push_back(r);
  }
  return out;
}

TEST(TriggerRateReportTest, AllFired) {
  const auto report = TriggerRateReport(SyntheticRecords(7, 10, true));
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].episodes, 7);
  EXPECT_DOUBLE_EQ(report[0].alea.mean, 1.0);
  EXPECT_DOUBLE_EQ(report[0].alea.std, 0.0);
  EXPECT_DOUBLE_EQ(report[0].epis.mean, 1.0);
  EXPECT_DOUBLE_EQ(report[0].epis.std, 0.0);
  const auto none = TriggerRateReport(SyntheticRecords(3, 10, false));
  EXPECT_DOUBLE_EQ(none[0].alea.mean, 0.0);
}

TEST(SignalCorrelationTest, SkipsUndefinedSteps) {
  // Including the t = 0 rows would pull r away from -1.
  EXPECT_NEAR(SignalCorrelation(SyntheticRecords(4, 20, true)), -1.0, 1e-12);
}

TEST(FormatDoubleTest, FixedPrecision) {
  EXPECT_EQ(FormatDouble(0.15), "0.150000");
  EXPECT_EQ(FormatDouble(1.0 / 3.0, 3), "0.333");
}

}  // namespace
}  // namespace udc
