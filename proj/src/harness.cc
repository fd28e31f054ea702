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
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "udc/error.h"
#include "udc/parallel.h"

namespace udc {

namespace {

// Stream tags for seed derivation.
constexpr uint64_t kTagCalibration = 0xca1;
constexpr uint64_t kTagEnsemble = 0xe25;
constexpr uint64_t kTagRuntime = 0x7ca1;
constexpr uint64_t kTagSensor = 0x5e25;

Condition MakeCondition(const std::string& name, const SensorSigma& sensor,
                        double mass, double friction) {
  Condition c;
  c.name = name;
  c.config.sensor_sigma = sensor;
  c.config.mass_mult = mass;
  c.config.friction_mult = friction;
  return c;
}

std::string OptionalDouble(const std::optional<double>& v) {
  return v.has_value() ? FormatDouble(*v) : "";
}

}  // namespace

std::string FormatDouble(double value, int digits) {
  if (!std::isfinite(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  std::string s(buf);
  // Avoid "-0.000000".
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

std::vector<Condition> StandardConditions(const SensorSigma& sensor,
                                          double mass_mult) {
  return {MakeCondition("nominal", SensorSigma{}, 1.0, 1.0),
          MakeCondition("sensor", sensor, 1.0, 1.0),
          MakeCondition("dynamics", SensorSigma{}, mass_mult, 1.0),
          MakeCondition("compound", sensor, mass_mult, 1.0)};
}

std::vector<Condition> ShiftConditions(const SensorSigma& sensor) {
  struct Shift {
    const char* name;
    double mass;
    double friction;
  };
  const Shift shifts[] = {{"mass_1.5x", 1.5, 1.0},
                          {"mass_2x", 2.0, 1.0},
                          {"friction_0.5x", 1.0, 0.5},
                          {"friction_1.5x", 1.0, 1.5}};
  std::vector<Condition> out;
  for (const Shift& s : shifts) {
    out.push_back(MakeCondition(std::string("dynamics/") + s.name,
                                SensorSigma{}, s.mass, s.friction));
    out.push_back(MakeCondition(std::string("compound/") + s.name, sensor,
                                s.mass, s.friction));
  }
  return out;
}

CalibrationSet CollectCalibrationSet(const Plant& plant,
                                     const PolicyParams& policy, int episodes,
                                     uint64_t seed) {
  if (episodes < 1) {
    throw Error(ErrorCode::kInvalidInput, "need >= 1 calibration episode");
  }
  const PerturbationConfig nominal = PerturbationConfig::Nominal();
  CalibrationSet cal;
  cal.transitions.reserve(static_cast<size_t>(episodes) *
                          plant.params().horizon);
  for (int e = 0; e < episodes; ++e) {
    PhysicsState s = plant.Reset(nominal, HashSeed(seed, e));
    std::mt19937_64 rng(HashSeed(seed, e, 1));
    Eigen::VectorXd obs = Observe(s, nominal, &rng);
    for (int t = 0; t < plant.params().horizon; ++t) {
      const Eigen::Vector3d a = FrozenPolicy(policy, obs);
      s = plant.Step(s, a, nominal);
      Eigen::VectorXd next = Observe(s, nominal, &rng);
      cal.transitions.push_back({obs, a, next});
      obs = std::move(next);
    }
  }
  return cal;
}

CalibrationSet PipelineCalibrationSet(const PipelineConfig& config,
                                      uint64_t seed) {
  return CollectCalibrationSet(Plant(config.plant), config.policy,
                               config.cal_episodes,
                               HashSeed(seed, kTagCalibration));
}

Models BuildModels(const PipelineConfig& config, uint64_t seed,
                   CalibrationSet* cal_out) {
  Models models;
  models.plant = Plant(config.plant);
  models.policy = config.policy;
  CalibrationSet cal = PipelineCalibrationSet(config, seed);
  models.alea = FitAleatoric(cal, ActiveMask(), config.alea);
  EnsembleConfig ens_config = config.ensemble;
  if (!config.augment) ens_config.noise_levels = {0.0};
  models.ens = FitEnsemble(cal, ActiveMask(), config.sensor.PerComponent(),
                           ens_config, HashSeed(seed, kTagEnsemble));
  RuntimeCalibrate(&models.ens, models.plant, models.policy, config.t_cal,
                   ens_config.m_e, HashSeed(seed, kTagRuntime));
  if (cal_out != nullptr) *cal_out = std::move(cal);
  return models;
}

uint64_t EpisodeSeed(uint64_t master_seed, int condition_index, int episode) {
  return HashSeed(master_seed, static_cast<uint64_t>(condition_index),
                  static_cast<uint64_t>(episode));
}

EpisodeRecord RunEpisode(const Models& models, const Condition& condition,
                         const ControllerConfig& controller_config,
                         uint64_t seed, bool keep_steps,
                         std::vector<TrajectoryRow>* trajectory) {
  EpisodeRecord rec;
  rec.seed = seed;
  rec.condition = condition.name;
  rec.kind = controller_config.kind;
  rec.alpha = controller_config.alpha;

  Controller controller(controller_config, models.policy, &models.alea,
                        &models.ens);
  PhysicsState s = models.plant.Reset(condition.config, seed);
  std::mt19937_64 sensor_rng(HashSeed(seed, kTagSensor));
  const int horizon = models.plant.params().horizon;
  if (keep_steps) rec.steps.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    const StepDecision d = controller.Step(s, condition.config, &sensor_rng);
    rec.alea_count += d.alea_fired;
    rec.epis_count += d.epis_fired;
    rec.recovery_count += d.recovery_applied;
    rec.dampen_count += d.dampen_applied;
    if (keep_steps) {
      rec.steps.push_back({d.sigma_alea, d.sigma_epis, d.epis_defined,
                           d.alea_fired, d.epis_fired, d.recovery_applied,
                           d.dampen_applied});
    }
    if (trajectory != nullptr) trajectory->push_back({t, s, d});
    s = models.plant.Step(s, d.final_action, condition.config);
  }
  rec.num_steps = horizon;
  rec.success = models.plant.IsSuccess(s);
  rec.final_object_z = s.object_pos.y();
  return rec;
}

const ResultRow* ResultTable::Find(const std::string& controller,
                                   const std::string& condition,
                                   std::optional<double> alpha) const {
  for (const ResultRow& r : rows) {
    if (r.controller == controller && r.condition == condition &&
        (!alpha.has_value() || std::abs(r.alpha - *alpha) < 1e-12)) {
      return &r;
    }
  }
  return nullptr;
}

ResultTable RunExperiment(const Models& models, const GridSpec& grid,
                          uint64_t master_seed, int workers,
                          std::vector<EpisodeRecord>* records,
                          bool keep_steps) {
  if (grid.episodes < 1) {
    throw Error(ErrorCode::kInvalidInput, "episodes must be >= 1");
  }
  struct Job {
    int condition;
    int controller;
    int episode;
  };
  std::vector<Job> jobs;
  for (int c = 0; c < static_cast<int>(grid.conditions.size()); ++c) {
    for (int k = 0; k < static_cast<int>(grid.controllers.size()); ++k) {
      for (int e = 0; e < grid.episodes; ++e) jobs.push_back({c, k, e});
    }
  }
  std::vector<EpisodeRecord> out(jobs.size());
  ParallelFor(static_cast<int>(jobs.size()), workers, [&](int i) {
    const Job& job = jobs[i];
    const uint64_t seed = EpisodeSeed(master_seed, job.condition, job.episode);
    try {
      out[i] = RunEpisode(models, grid.conditions[job.condition],
                          grid.controllers[job.controller], seed, keep_steps);
    } catch (const Error& e) {
      throw Error(e.code(),
                  std::string(e.what()) + " [condition=" +
                      grid.conditions[job.condition].name + " controller=" +
                      ControllerName(grid.controllers[job.controller].kind) +
                      " episode=" + std::to_string(job.episode) + "]");
    }
    out[i].condition_index = job.condition;
    out[i].episode = job.episode;
  });
  ResultTable table =
      Aggregate(grid.experiment, grid.conditions, out, grid.baseline);
  if (records != nullptr) *records = std::move(out);
  return table;
}

ResultTable Aggregate(const std::string& experiment,
                      const std::vector<Condition>& conditions,
                      const std::vector<EpisodeRecord>& records,
                      ControllerKind baseline) {
  using Key = std::tuple<int, std::string, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const EpisodeRecord*>> groups;
  for (const EpisodeRecord& r : records) {
    Key key{r.condition_index, ControllerName(r.kind), r.alpha};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  ResultTable table;
  for (const Key& key : order) {
    std::vector<const EpisodeRecord*> eps = groups[key];
    // Deterministic aggregation order regardless of scheduling.
    std::sort(eps.begin(), eps.end(),
              [](const EpisodeRecord* a, const EpisodeRecord* b) {
                return a->episode < b->episode;
              });
    ResultRow row;
    row.experiment = experiment;
    row.condition = eps.front()->condition;
    row.controller = std::get<1>(key);
    row.alpha = std::get<2>(key);
    const int ci = std::get<0>(key);
    if (ci >= 0 && ci < static_cast<int>(conditions.size())) {
      row.config = conditions[ci].config;
    }
    row.episodes = static_cast<int>(eps.size());
    std::vector<double> alea, epis;
    double rec = 0.0, damp = 0.0;
    for (const EpisodeRecord* e : eps) {
      row.successes += e->success;
      alea.push_back(e->alea_rate());
      epis.push_back(e->epis_rate());
      rec += e->recovery_rate();
      damp += e->dampen_rate();
    }
    row.success_rate = static_cast<double>(row.successes) / row.episodes;
    row.ci = WilsonInterval(row.successes, row.episodes);
    row.alea_rate = ComputeMeanStd(alea);
    row.epis_rate = ComputeMeanStd(epis);
    row.recovery_rate = rec / row.episodes;
    row.dampen_rate = damp / row.episodes;
    table.rows.push_back(row);
  }
  const std::string base = ControllerName(baseline);
  for (ResultRow& row : table.rows) {
    row.baseline = base;
    if (row.controller == base) continue;
    for (const ResultRow& other : table.rows) {
      if (other.controller == base && other.condition == row.condition &&
          other.alpha == row.alpha) {
        row.delta = row.success_rate - other.success_rate;
        row.delta_ci = DifferenceInterval(row.successes, row.episodes,
                                          other.successes, other.episodes);
        break;
      }
    }
  }
  return table;
}

std::vector<TriggerRates> TriggerRateReport(
    const std::vector<EpisodeRecord>& records) {
  if (records.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no records to report");
  }
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const EpisodeRecord& r : records) {
    const auto key = std::make_pair(r.condition, std::string(ControllerName(r.kind)));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.first.push_back(r.alea_rate());
    it->second.second.push_back(r.epis_rate());
  }
  std::vector<TriggerRates> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    TriggerRates tr;
    tr.condition = key.first;
    tr.controller = key.second;
    tr.episodes = static_cast<int>(g.first.size());
    tr.alea = ComputeMeanStd(g.first);
    tr.epis = ComputeMeanStd(g.second);
    out.push_back(tr);
  }
  return out;
}

double SignalCorrelation(const std::vector<EpisodeRecord>& records) {
  std::vector<double> a, e;
  for (const EpisodeRecord& r : records) {
    for (const StepSummary& s : r.steps) {
      if (!s.epis_defined) continue;
      a.push_back(s.sigma_alea);
      e.push_back(s.sigma_epis);
    }
  }
  return PearsonR(a, e);
}

std::vector<double> DefaultAlphas() { return {0.15, 0.30, 0.50}; }

GridSpec MainGrid(const SensorSigma& sensor, double alpha, int n_resample,
                  int episodes, double mass_mult) {
  GridSpec grid;
  grid.experiment = "main";
  grid.conditions = StandardConditions(sensor, mass_mult);
  for (ControllerKind k : AllControllerKinds()) {
    grid.controllers.push_back({k, alpha, n_resample});
  }
  grid.episodes = episodes;
  return grid;
}

GridSpec AlphaSweepGrid(const SensorSigma& sensor,
                        const std::vector<double>& alphas, int episodes) {
  GridSpec grid;
  grid.experiment = "sweep_alpha";
  const std::vector<Condition> standard = StandardConditions(sensor);
  grid.conditions = {standard[1], standard[3]};
  for (double a : alphas) {
    grid.controllers.push_back({ControllerKind::kTotalU, a, 5});
    grid.controllers.push_back({ControllerKind::kDecomposed, a, 5});
  }
  grid.episodes = episodes;
  return grid;
}

GridSpec ShiftSweepGrid(const SensorSigma& sensor, double alpha,
                        int n_resample, int episodes) {
  GridSpec grid;
  grid.experiment = "sweep_shift";
  grid.conditions = ShiftConditions(sensor);
  for (ControllerKind k : AllControllerKinds()) {
    grid.controllers.push_back({k, alpha, n_resample});
  }
  grid.episodes = episodes;
  return grid;
}

void WriteResultsCsv(const ResultTable& table, std::ostream& out) {
  out << "experiment,controller,condition,alpha,sigma_gripper_pos,"
         "sigma_gripper_vel,sigma_object_pos,mass_mult,friction_mult,episodes,"
         "successes,success_rate,ci_low,ci_high,alea_rate,alea_rate_std,"
         "epis_rate,epis_rate_std,recovery_rate,dampen_rate,baseline,"
         "delta_vs_baseline,delta_ci_low,delta_ci_high\n";
  for (const ResultRow& r : table.rows) {
    const SensorSigma& s = r.config.sensor_sigma;
    out << r.experiment << ',' << r.controller << ',' << r.condition << ','
        << FormatDouble(r.alpha, 2) << ',' << FormatDouble(s.gripper_pos, 4)
        << ',' << FormatDouble(s.gripper_vel, 4) << ','
        << FormatDouble(s.object_pos, 4) << ','
        << FormatDouble(r.config.mass_mult, 3) << ','
        << FormatDouble(r.config.friction_mult, 3) << ',' << r.episodes << ','
        << r.successes << ',' << FormatDouble(r.success_rate) << ','
        << FormatDouble(r.ci.low) << ',' << FormatDouble(r.ci.high) << ','
        << FormatDouble(r.alea_rate.mean) << ','
        << FormatDouble(r.alea_rate.std) << ','
        << FormatDouble(r.epis_rate.mean) << ','
        << FormatDouble(r.epis_rate.std) << ','
        << FormatDouble(r.recovery_rate) << ','
        << FormatDouble(r.dampen_rate) << ',' << r.baseline << ','
        << OptionalDouble(r.delta) << ','
        << (r.delta_ci ? FormatDouble(r.delta_ci->low) : "") << ','
        << (r.delta_ci ? FormatDouble(r.delta_ci->high) : "") << '\n';
  }
}

nlohmann::json ResultsToJson(const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ResultRow& r : table.rows) {
    nlohmann::json j = {
        {"experiment", r.experiment},
        {"controller", r.controller},
        {"condition", r.condition},
        {"alpha", r.alpha},
        {"perturbation", PerturbationToJson(r.config)},
        {"episodes", r.episodes},
        {"successes", r.successes},
        {"success_rate", r.success_rate},
        {"ci95", {r.ci.low, r.ci.high}},
        {"alea_rate", {{"mean", r.alea_rate.mean}, {"std", r.alea_rate.std}}},
        {"epis_rate", {{"mean", r.epis_rate.mean}, {"std", r.epis_rate.std}}},
        {"recovery_rate", r.recovery_rate},
        {"dampen_rate", r.dampen_rate},
        {"baseline", r.baseline}};
    if (r.delta) {
      j["delta_vs_baseline"] = *r.delta;
      j["delta_ci95"] = {r.delta_ci->low, r.delta_ci->high};
    }
    rows.push_back(j);
  }
  return {{"rows", rows}};
}

void WriteRecordsCsv(const std::string& experiment,
                     const std::vector<EpisodeRecord>& records,
                     std::ostream& out) {
  out << "experiment,condition,controller,alpha,episode,seed,success,"
         "final_object_z,steps,alea_rate,epis_rate,recovery_rate,"
         "dampen_rate\n";
  for (const EpisodeRecord& r : records) {
    out << experiment << ',' << r.condition << ',' << ControllerName(r.kind)
        << ',' << FormatDouble(r.alpha, 2) << ',' << r.episode << ','
        << r.seed << ',' << (r.success ? 1 : 0) << ','
        << FormatDouble(r.final_object_z) << ',' << r.num_steps << ','
        << FormatDouble(r.alea_rate()) << ',' << FormatDouble(r.epis_rate())
        << ',' << FormatDouble(r.recovery_rate()) << ','
        << FormatDouble(r.dampen_rate()) << '\n';
  }
}

void WriteStepsCsv(const std::string& experiment,
                   const std::vector<EpisodeRecord>& records,
                   std::ostream& out) {
  out << "experiment,condition,controller,alpha,episode,t,sigma_alea,"
         "sigma_epis,epis_defined,alea_fired,epis_fired,recovery,dampen\n";
  for (const EpisodeRecord& r : records) {
    for (size_t t = 0; t < r.steps.size(); ++t) {
      const StepSummary& s = r.steps[t];
      out << experiment << ',' << r.condition << ',' << ControllerName(r.kind)
          << ',' << FormatDouble(r.alpha, 2) << ',' << r.episode << ',' << t
          << ',' << FormatDouble(s.sigma_alea, 9) << ','
          << FormatDouble(s.sigma_epis, 9) << ',' << s.epis_defined << ','
          << s.alea_fired << ',' << s.epis_fired << ',' << s.recovery << ','
          << s.dampen << '\n';
    }
  }
}

void WriteTrajectoryCsv(const std::vector<TrajectoryRow>& rows,
                        std::ostream& out) {
  out << "t,gripper_x,gripper_z,gripper_vx,gripper_vz,object_x,object_z,"
         "object_vx,object_vz,grasped,slip";
  for (int i = 0; i < kObsDim; ++i) out << ",obs_" << i;
  for (int i = 0; i < kObsDim; ++i) out << ",used_obs_" << i;
  out << ",raw_fx,raw_fz,raw_grasp,fx,fz,grasp,sigma_alea,sigma_epis,"
         "alea_fired,epis_fired,recovery,dampen\n";
  for (const TrajectoryRow& r : rows) {
    const PhysicsState& s = r.state;
    const StepDecision& d = r.decision;
    out << r.t;
    for (double v : {s.gripper_pos.x(), s.gripper_pos.y(), s.gripper_vel.x(),
                     s.gripper_vel.y(), s.object_pos.x(), s.object_pos.y(),
                     s.object_vel.x(), s.object_vel.y()}) {
      out << ',' << FormatDouble(v, 9);
    }
    out << ',' << s.grasped << ',' << FormatDouble(s.slip, 9);
    for (int i = 0; i < kObsDim; ++i) out << ',' << FormatDouble(d.raw_obs(i), 9);
    for (int i = 0; i < kObsDim; ++i) {
      out << ',' << FormatDouble(d.used_obs(i), 9);
    }
    for (int i = 0; i < 3; ++i) out << ',' << FormatDouble(d.raw_action(i), 9);
    for (int i = 0; i < 3; ++i) {
      out << ',' << FormatDouble(d.final_action(i), 9);
    }
    out << ',' << FormatDouble(d.sigma_alea, 9) << ','
        << FormatDouble(d.sigma_epis, 9) << ',' << d.alea_fired << ','
        << d.epis_fired << ',' << d.recovery_applied << ','
        << d.dampen_applied << '\n';
  }
}

}  // namespace udc
