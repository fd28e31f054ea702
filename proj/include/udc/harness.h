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

// Experiment orchestration: calibration pipeline, seeded episode grids,
// aggregation into result tables, and CSV/JSON emitters.

#ifndef UDC_HARNESS_H_
#define UDC_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "udc/aleatoric.h"
#include "udc/env.h"
#include "udc/epistemic.h"
#include "udc/policy.h"
#include "udc/stats.h"

namespace udc {

struct Condition {
  std::string name;
  PerturbationConfig config;
};

// nominal, sensor, dynamics (mass x mass_mult), compound.
std::vector<Condition> StandardConditions(const SensorSigma& sensor,
                                          double mass_mult = 2.0);

// Dynamics-only and compound rows for mass 1.5x, 2x and friction 0.5x, 1.5x.
std::vector<Condition> ShiftConditions(const SensorSigma& sensor);

struct PipelineConfig {
  PlantParams plant;
  PolicyParams policy;
  SensorSigma sensor = DefaultSensorSigma();
  int cal_episodes = 50;
  int t_cal = 300;
  AleatoricOptions alea;
  EnsembleConfig ensemble;
  bool augment = true;
};

struct Models {
  Plant plant;
  PolicyParams policy;
  AleatoricModel alea;
  DynamicsEnsemble ens;
};

// Nominal closed-loop transitions of the frozen policy.
CalibrationSet CollectCalibrationSet(const Plant& plant,
                                     const PolicyParams& policy, int episodes,
                                     uint64_t seed);

// D_cal for a pipeline and master seed; BuildModels uses the same set.
CalibrationSet PipelineCalibrationSet(const PipelineConfig& config,
                                      uint64_t seed);

// Collects D_cal, fits both estimators and runtime-calibrates tau_epis.
Models BuildModels(const PipelineConfig& config, uint64_t seed,
                   CalibrationSet* cal_out = nullptr);

struct StepSummary {
  double sigma_alea = 0.0;
  double sigma_epis = 0.0;
  bool epis_defined = false;
  bool alea_fired = false;
  bool epis_fired = false;
  bool recovery = false;
  bool dampen = false;
};

struct TrajectoryRow {
  int t = 0;
  PhysicsState state;
  StepDecision decision;
};

struct EpisodeRecord {
  uint64_t seed = 0;
  int condition_index = 0;
  std::string condition;
  ControllerKind kind = ControllerKind::kVanilla;
  double alpha = 0.0;
  int episode = 0;
  bool success = false;
  double final_object_z = 0.0;
  int num_steps = 0;
  int alea_count = 0;
  int epis_count = 0;
  int recovery_count = 0;
  int dampen_count = 0;
  std::vector<StepSummary> steps;  // filled only when requested

  double alea_rate() const { return Rate(alea_count); }
  double epis_rate() const { return Rate(epis_count); }
  double recovery_rate() const { return Rate(recovery_count); }
  double dampen_rate() const { return Rate(dampen_count); }

 private:
  double Rate(int count) const {
    return num_steps > 0 ? static_cast<double>(count) / num_steps : 0.0;
  }
};

// Per-episode seed shared by every controller in a cell row.
uint64_t EpisodeSeed(uint64_t master_seed, int condition_index, int episode);

EpisodeRecord RunEpisode(const Models& models, const Condition& condition,
                         const ControllerConfig& controller, uint64_t seed,
                         bool keep_steps = false,
                         std::vector<TrajectoryRow>* trajectory = nullptr);

struct GridSpec {
  std::string experiment = "main";
  std::vector<Condition> conditions;
  std::vector<ControllerConfig> controllers;
  int episodes = 1000;
  ControllerKind baseline = ControllerKind::kTotalU;
};

struct ResultRow {
  std::string experiment;
  std::string controller;
  std::string condition;
  double alpha = 0.0;
  PerturbationConfig config;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  Interval ci;
  MeanStd alea_rate;
  MeanStd epis_rate;
  double recovery_rate = 0.0;
  double dampen_rate = 0.0;
  std::string baseline;
  std::optional<double> delta;
  std::optional<Interval> delta_ci;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  const ResultRow* Find(const std::string& controller,
                        const std::string& condition,
                        std::optional<double> alpha = std::nullopt) const;
};

// Runs every (condition, controller, episode) cell. Output depends only on
// the models, the grid and the master seed.
ResultTable RunExperiment(const Models& models, const GridSpec& grid,
                          uint64_t master_seed, int workers,
                          std::vector<EpisodeRecord>* records = nullptr,
                          bool keep_steps = false);

// Aggregates records into table rows, grouped by (condition, controller,
// alpha) in first-appearance order, with deltas against `baseline`.
ResultTable Aggregate(const std::string& experiment,
                      const std::vector<Condition>& conditions,
                      const std::vector<EpisodeRecord>& records,
                      ControllerKind baseline);

struct TriggerRates {
  std::string condition;
  std::string controller;
  int episodes = 0;
  MeanStd alea;
  MeanStd epis;
};

std::vector<TriggerRates> TriggerRateReport(
    const std::vector<EpisodeRecord>& records);

// Pooled Pearson r between per-step sigma_alea and sigma_epis over steps
// where sigma_epis is defined.
double SignalCorrelation(const std::vector<EpisodeRecord>& records);

std::vector<double> DefaultAlphas();  // 0.15, 0.30, 0.50

GridSpec AlphaSweepGrid(const SensorSigma& sensor,
                        const std::vector<double>& alphas, int episodes);
GridSpec ShiftSweepGrid(const SensorSigma& sensor, double alpha, int n_resample,
                        int episodes);
GridSpec MainGrid(const SensorSigma& sensor, double alpha, int n_resample,
                  int episodes, double mass_mult = 2.0);

void WriteResultsCsv(const ResultTable& table, std::ostream& out);
nlohmann::json ResultsToJson(const ResultTable& table);
void WriteRecordsCsv(const std::string& experiment,
                     const std::vector<EpisodeRecord>& records,
                     std::ostream& out);
void WriteStepsCsv(const std::string& experiment,
                   const std::vector<EpisodeRecord>& records,
                   std::ostream& out);
void WriteTrajectoryCsv(const std::vector<TrajectoryRow>& rows,
                        std::ostream& out);

// Fixed-precision formatting used by every CSV writer.
std::string FormatDouble(double value, int digits = 6);

}  // namespace udc

#endif  // UDC_HARNESS_H_
