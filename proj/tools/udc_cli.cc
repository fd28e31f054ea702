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

// Command-line front end: calibrate, train-ensemble, run, sweep-alpha,
// sweep-shift, analyze, track-sim.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "udc/aleatoric.h"
#include "udc/capacity.h"
#include "udc/env.h"
#include "udc/epistemic.h"
#include "udc/error.h"
#include "udc/harness.h"
#include "udc/policy.h"

namespace {

using nlohmann::json;

struct CommonOptions {
  uint64_t seed = 1;
  int episodes = 1000;
  std::string config_path;
  std::string out_dir = "out";
  std::string models_dir;
  int workers = 1;
};

struct RunOptions {
  double alpha = 0.3;
  int n_resample = 5;
  double mass_mult = 2.0;
  std::string trajectory_path;
  std::string trajectory_condition = "compound";
  std::string trajectory_controller = "decomposed";
};

json LoadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw udc::Error(udc::ErrorCode::kInvalidInput, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw udc::Error(udc::ErrorCode::kInvalidInput,
                     path + ": " + std::string(e.what()));
  }
}

void SaveJson(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw udc::Error(udc::ErrorCode::kInvalidInput,
                     "cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

json ReadConfig(const CommonOptions& opt) {
  return opt.config_path.empty() ? json::object() : LoadJson(opt.config_path);
}

udc::PipelineConfig PipelineFromJson(const json& cfg, int workers) {
  udc::PipelineConfig p;
  if (cfg.contains("plant")) p.plant = udc::PlantParamsFromJson(cfg["plant"]);
  if (cfg.contains("policy")) {
    p.policy = udc::PolicyParamsFromJson(cfg["policy"]);
  }
  if (cfg.contains("sensor")) {
    const json& s = cfg["sensor"];
    p.sensor.gripper_pos = s.value("gripper_pos", p.sensor.gripper_pos);
    p.sensor.gripper_vel = s.value("gripper_vel", p.sensor.gripper_vel);
    p.sensor.object_pos = s.value("object_pos", p.sensor.object_pos);
  }
  p.cal_episodes = cfg.value("cal_episodes", p.cal_episodes);
  p.t_cal = cfg.value("t_cal", p.t_cal);
  p.augment = cfg.value("augment", p.augment);
  if (cfg.contains("aleatoric")) {
    const json& a = cfg["aleatoric"];
    p.alea.lambda = a.value("lambda", p.alea.lambda);
    p.alea.percentile = a.value("percentile", p.alea.percentile);
    p.alea.m_a = a.value("m_a", p.alea.m_a);
  }
  if (cfg.contains("ensemble")) {
    const json& e = cfg["ensemble"];
    p.ensemble.members = e.value("members", p.ensemble.members);
    p.ensemble.hidden = e.value("hidden", p.ensemble.hidden);
    p.ensemble.train.epochs = e.value("epochs", p.ensemble.train.epochs);
    p.ensemble.train.batch_size =
        e.value("batch_size", p.ensemble.train.batch_size);
    p.ensemble.train.learning_rate =
        e.value("learning_rate", p.ensemble.train.learning_rate);
    p.ensemble.m_e = e.value("m_e", p.ensemble.m_e);
    p.ensemble.r2_threshold = e.value("r2_threshold", p.ensemble.r2_threshold);
  }
  p.ensemble.workers = workers;
  return p;
}

RunOptions RunOptionsFromJson(const json& cfg, RunOptions r) {
  r.alpha = cfg.value("alpha", r.alpha);
  r.n_resample = cfg.value("n_resample", r.n_resample);
  r.mass_mult = cfg.value("mass_mult", r.mass_mult);
  return r;
}

// Trains (or loads from --models) the plant-side estimators.
udc::Models ObtainModels(const CommonOptions& opt,
                         const udc::PipelineConfig& pipeline) {
  if (opt.models_dir.empty()) return udc::BuildModels(pipeline, opt.seed);
  const std::filesystem::path dir(opt.models_dir);
  udc::Models m;
  m.plant = udc::Plant(pipeline.plant);
  m.policy = pipeline.policy;
  m.alea = udc::AleatoricFromJson(LoadJson((dir / "aleatoric.json").string()));
  m.ens = udc::EnsembleFromJson(LoadJson((dir / "ensemble.json").string()));
  if (!m.ens.tau_epis.has_value()) {
    throw udc::Error(udc::ErrorCode::kConfiguration,
                     "ensemble.json carries no runtime threshold");
  }
  return m;
}

std::filesystem::path PrepareOut(const CommonOptions& opt) {
  std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void WriteGridOutputs(const std::filesystem::path& dir,
                      const udc::ResultTable& table,
                      const std::string& experiment,
                      const std::vector<udc::EpisodeRecord>& records) {
  {
    std::ofstream out(dir / "results.csv");
    udc::WriteResultsCsv(table, out);
  }
  SaveJson(udc::ResultsToJson(table), dir / "results.json");
  std::ofstream out(dir / "records.csv");
  udc::WriteRecordsCsv(experiment, records, out);
}

void PrintTable(const udc::ResultTable& table) {
  for (const udc::ResultRow& r : table.rows) {
    std::cout << r.condition << '\t' << r.controller << "\talpha="
              << udc::FormatDouble(r.alpha, 2) << "\tsuccess="
              << udc::FormatDouble(r.success_rate, 4) << " ["
              << udc::FormatDouble(r.ci.low, 4) << ", "
              << udc::FormatDouble(r.ci.high, 4) << "]\n";
  }
}

int CmdCalibrate(const CommonOptions& opt) {
  const udc::PipelineConfig p = PipelineFromJson(ReadConfig(opt), opt.workers);
  const udc::CalibrationSet cal = udc::PipelineCalibrationSet(p, opt.seed);
  const udc::AleatoricModel model =
      udc::FitAleatoric(cal, udc::ActiveMask(), p.alea);
  const auto dir = PrepareOut(opt);
  SaveJson(udc::AleatoricToJson(model), dir / "aleatoric.json");
  std::cout << "transitions=" << cal.size()
            << " tau_alea=" << udc::FormatDouble(model.tau_alea, 6) << '\n';
  return 0;
}

int CmdTrainEnsemble(const CommonOptions& opt) {
  const udc::PipelineConfig p = PipelineFromJson(ReadConfig(opt), opt.workers);
  udc::CalibrationSet cal;
  const udc::Models m = udc::BuildModels(p, opt.seed, &cal);
  const auto dir = PrepareOut(opt);
  SaveJson(udc::AleatoricToJson(m.alea), dir / "aleatoric.json");
  SaveJson(udc::EnsembleToJson(m.ens), dir / "ensemble.json");
  std::cout << "transitions=" << cal.size()
            << " tau_alea=" << udc::FormatDouble(m.alea.tau_alea, 6)
            << " tau_epis=" << udc::FormatDouble(*m.ens.tau_epis, 6)
            << " reliable_dims=" << m.ens.reliable_dims.size() << '\n';
  return 0;
}

int RunGrid(const CommonOptions& opt, const udc::GridSpec& grid,
            const udc::Models& models, bool keep_steps,
            std::vector<udc::EpisodeRecord>* records) {
  const udc::ResultTable table = udc::RunExperiment(
      models, grid, opt.seed, opt.workers, records, keep_steps);
  const auto dir = PrepareOut(opt);
  WriteGridOutputs(dir, table, grid.experiment, *records);
  PrintTable(table);
  return 0;
}

int CmdRun(const CommonOptions& opt, const RunOptions& cli_run) {
  const json cfg = ReadConfig(opt);
  const udc::PipelineConfig p = PipelineFromJson(cfg, opt.workers);
  const RunOptions r = RunOptionsFromJson(cfg, cli_run);
  const udc::Models models = ObtainModels(opt, p);
  const udc::GridSpec grid = udc::MainGrid(p.sensor, r.alpha, r.n_resample,
                                           opt.episodes, r.mass_mult);
  std::vector<udc::EpisodeRecord> records;
  RunGrid(opt, grid, models, false, &records);
  if (!r.trajectory_path.empty()) {
    const udc::ControllerKind kind =
        udc::ParseControllerKind(r.trajectory_controller);
    for (size_t c = 0; c < grid.conditions.size(); ++c) {
      if (grid.conditions[c].name != r.trajectory_condition) continue;
      udc::ControllerConfig ctrl;
      ctrl.kind = kind;
      ctrl.alpha = r.alpha;
      ctrl.n_resample = r.n_resample;
      std::vector<udc::TrajectoryRow> rows;
      udc::RunEpisode(models, grid.conditions[c], ctrl,
                      udc::EpisodeSeed(opt.seed, static_cast<int>(c), 0), false,
                      &rows);
      std::ofstream out(r.trajectory_path);
      udc::WriteTrajectoryCsv(rows, out);
      return 0;
    }
    throw udc::Error(udc::ErrorCode::kInvalidInput,
                     "unknown condition " + r.trajectory_condition);
  }
  return 0;
}

int CmdSweepAlpha(const CommonOptions& opt) {
  const udc::PipelineConfig p = PipelineFromJson(ReadConfig(opt), opt.workers);
  const udc::Models models = ObtainModels(opt, p);
  std::vector<udc::EpisodeRecord> records;
  return RunGrid(opt,
                 udc::AlphaSweepGrid(p.sensor, udc::DefaultAlphas(),
                                     opt.episodes),
                 models, false, &records);
}

int CmdSweepShift(const CommonOptions& opt, const RunOptions& cli_run) {
  const json cfg = ReadConfig(opt);
  const udc::PipelineConfig p = PipelineFromJson(cfg, opt.workers);
  const RunOptions r = RunOptionsFromJson(cfg, cli_run);
  const udc::Models models = ObtainModels(opt, p);
  std::vector<udc::EpisodeRecord> records;
  return RunGrid(
      opt,
      udc::ShiftSweepGrid(p.sensor, r.alpha, r.n_resample, opt.episodes),
      models, false, &records);
}

int CmdAnalyze(const CommonOptions& opt, const RunOptions& cli_run) {
  const json cfg = ReadConfig(opt);
  const udc::PipelineConfig p = PipelineFromJson(cfg, opt.workers);
  const RunOptions r = RunOptionsFromJson(cfg, cli_run);
  const udc::Models models = ObtainModels(opt, p);
  const udc::GridSpec grid = udc::MainGrid(p.sensor, r.alpha, r.n_resample,
                                           opt.episodes, r.mass_mult);
  std::vector<udc::EpisodeRecord> records;
  RunGrid(opt, grid, models, true, &records);
  const auto dir = PrepareOut(opt);
  {
    std::ofstream out(dir / "steps.csv");
    udc::WriteStepsCsv(grid.experiment, records, out);
  }
  json rates = json::array();
  std::ofstream csv(dir / "trigger_rates.csv");
  csv << "condition,controller,episodes,alea_rate_mean,alea_rate_std,"
         "epis_rate_mean,epis_rate_std\n";
  for (const udc::TriggerRates& t : udc::TriggerRateReport(records)) {
    csv << t.condition << ',' << t.controller << ',' << t.episodes << ','
        << udc::FormatDouble(t.alea.mean) << ','
        << udc::FormatDouble(t.alea.std) << ','
        << udc::FormatDouble(t.epis.mean) << ','
        << udc::FormatDouble(t.epis.std) << '\n';
    rates.push_back({{"condition", t.condition},
                     {"controller", t.controller},
                     {"episodes", t.episodes},
                     {"alea_rate", t.alea.mean},
                     {"epis_rate", t.epis.mean}});
  }
  const double r_pooled = udc::SignalCorrelation(records);
  SaveJson({{"signal_correlation", r_pooled},
            {"tau_alea", models.alea.tau_alea},
            {"tau_epis", *models.ens.tau_epis},
            {"trigger_rates", rates}},
           dir / "analysis.json");
  std::cout << "pooled r(sigma_alea, sigma_epis)="
            << udc::FormatDouble(r_pooled, 4) << '\n';
  return 0;
}

int CmdTrackSim(const CommonOptions& opt) {
  const json cfg = ReadConfig(opt);
  udc::TrackingConfig tc;
  tc.workers = opt.workers;
  if (cfg.contains("stream")) {
    tc.stream = udc::StreamSpecFromJson(cfg["stream"]);
  }
  tc.eval_streams = cfg.value("eval_streams", tc.eval_streams);
  if (cfg.contains("selector")) {
    const json& s = cfg["selector"];
    tc.selector.epsilon = s.value("epsilon", tc.selector.epsilon);
    tc.selector.lr = s.value("lr", tc.selector.lr);
    tc.selector.gamma = s.value("gamma", tc.selector.gamma);
    tc.selector.train_streams =
        s.value("train_streams", tc.selector.train_streams);
    tc.selector.train_passes = s.value("train_passes", tc.selector.train_passes);
    udc::RewardConfig& rw = tc.selector.reward;
    rw.c_cap = s.value("c_cap", rw.c_cap);
    rw.c_up = s.value("c_up", rw.c_up);
    rw.c_down = s.value("c_down", rw.c_down);
    rw.c_fail = s.value("c_fail", rw.c_fail);
    rw.q_keep = s.value("q_keep", rw.q_keep);
    rw.q_min = s.value("q_min", rw.q_min);
  }
  const udc::TrackingResult result = udc::RunTrackingExperiment(tc, opt.seed);
  const auto dir = PrepareOut(opt);
  udc::WriteTrackingCsv(result.reports, (dir / "results.csv").string());
  SaveJson(udc::TrackingToJson(result), dir / "results.json");
  for (const udc::TrackingReport& r : result.reports) {
    std::cout << r.stream << '\t' << r.selector << "\tsavings="
              << udc::FormatDouble(r.savings, 4)
              << "\tquality=" << udc::FormatDouble(r.mean_quality, 4)
              << "\tswitches=" << r.switches << '\n';
  }
  return 0;
}

void AddCommon(CLI::App* app, CommonOptions* opt, bool models) {
  app->add_option("--seed", opt->seed, "Master seed");
  app->add_option("--episodes", opt->episodes, "Episodes per grid cell");
  app->add_option("--config", opt->config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app->add_option("--out", opt->out_dir, "Output directory");
  app->add_option("--workers", opt->workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  if (models) {
    app->add_option("--models", opt->models_dir,
                    "Directory with aleatoric.json and ensemble.json")
        ->check(CLI::ExistingDirectory);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposed-uncertainty control simulator"};
  app.require_subcommand(1);
  CommonOptions opt;
  RunOptions run;

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Collect nominal transitions and fit the density model");
  AddCommon(calibrate, &opt, false);
  CLI::App* train = app.add_subcommand(
      "train-ensemble", "Fit both estimators and calibrate thresholds");
  AddCommon(train, &opt, false);

  CLI::App* run_cmd = app.add_subcommand("run", "Main controller grid");
  AddCommon(run_cmd, &opt, true);
  run_cmd->add_option("--alpha", run.alpha, "Dampening factor");
  run_cmd->add_option("--trajectory", run.trajectory_path,
                      "Write one episode trajectory CSV");
  run_cmd->add_option("--trajectory-condition", run.trajectory_condition,
                      "Condition of the traced episode (episode 0)");
  run_cmd->add_option("--trajectory-controller", run.trajectory_controller,
                      "Controller of the traced episode");

  CLI::App* alpha = app.add_subcommand("sweep-alpha", "Dampening sweep");
  AddCommon(alpha, &opt, true);
  CLI::App* shift = app.add_subcommand("sweep-shift", "Dynamics-shift sweep");
  AddCommon(shift, &opt, true);
  shift->add_option("--alpha", run.alpha, "Dampening factor");
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Trigger rates and signal correlation");
  AddCommon(analyze, &opt, true);
  analyze->add_option("--alpha", run.alpha, "Dampening factor");
  CLI::App* track = app.add_subcommand("track-sim", "Capacity selection");
  AddCommon(track, &opt, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*calibrate) return CmdCalibrate(opt);
    if (*train) return CmdTrainEnsemble(opt);
    if (*run_cmd) return CmdRun(opt, run);
    if (*alpha) return CmdSweepAlpha(opt);
    if (*shift) return CmdSweepShift(opt, run);
    if (*analyze) return CmdAnalyze(opt, run);
    if (*track) return CmdTrackSim(opt);
  } catch (const udc::Error& e) {
    std::cerr << "error [" << udc::ErrorCodeName(e.code()) << "]: " << e.what()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
