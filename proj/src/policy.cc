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

#include "udc/policy.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "udc/error.h"
#include "udc/stats.h"

namespace udc {

Eigen::Vector3d FrozenPolicy(const PolicyParams& p, const Eigen::VectorXd& obs) {
  if (obs.size() != kObsDim) {
    throw Error(ErrorCode::kInvalidInput, "policy expects a 10-dim observation");
  }
  const Eigen::Vector2d gp = obs.segment<2>(kGripperPos);
  const Eigen::Vector2d gv = obs.segment<2>(kGripperVel);
  const Eigen::Vector2d op = obs.segment<2>(kObjectPos);
  const double goal = obs(kGoalHeight);
  const Eigen::Vector3d prev = obs.segment<3>(kPrevAction);
  const Eigen::Vector2d rel = op - gp - p.grip_offset;
  const double sep = rel.norm();

  Eigen::Vector2d u;
  double grasp;
  if (prev(2) > 0.5 && sep < p.release_radius) {
    // Holding: lift toward the goal, keep x.
    const Eigen::Vector2d target(gp.x(), goal - p.grip_offset.y());
    u = p.kp_hold * (target - gp) - p.kd_hold * gv + Eigen::Vector2d(0, p.ff_z);
    grasp = 1.0;
  } else if (sep < p.close_radius && gv.norm() < p.close_speed) {
    u = -p.kd_hold * gv;
    grasp = 1.0;
  } else {
    grasp = -1.0;
    Eigen::Vector2d target = op - p.grip_offset;
    if (std::abs(rel.x()) > p.align_tol) target.y() += p.hover;
    u = p.kp_approach * (target - gp) - p.kd_approach * gv;
  }
  const Eigen::Vector2d du =
      (u - prev.head<2>()).cwiseMax(-p.max_delta).cwiseMin(p.max_delta);
  u = prev.head<2>() + du;
  return ClampAction(Eigen::Vector3d(u.x(), u.y(), grasp));
}

Eigen::Vector3d Dampen(const Eigen::Vector3d& action, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "alpha outside [0, 1]");
  }
  return (1.0 - alpha) * action;
}

const char* ControllerName(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kVanilla:
      return "vanilla";
    case ControllerKind::kRecoveryOnly:
      return "recovery_only";
    case ControllerKind::kDampenOnly:
      return "dampen_only";
    case ControllerKind::kTotalU:
      return "total_u";
    case ControllerKind::kDecomposed:
      return "decomposed";
  }
  return "unknown";
}

ControllerKind ParseControllerKind(const std::string& name) {
  for (ControllerKind k : AllControllerKinds()) {
    if (name == ControllerName(k)) return k;
  }
  throw Error(ErrorCode::kConfiguration, "unknown controller '" + name + "'");
}

const std::vector<ControllerKind>& AllControllerKinds() {
  static const std::vector<ControllerKind> kinds = {
      ControllerKind::kVanilla, ControllerKind::kRecoveryOnly,
      ControllerKind::kDampenOnly, ControllerKind::kTotalU,
      ControllerKind::kDecomposed};
  return kinds;
}

void ControllerConfig::Validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "alpha outside [0, 1]");
  }
  if (n_resample < 1) {
    throw Error(ErrorCode::kInvalidInput, "n_resample must be >= 1");
  }
}

Controller::Controller(const ControllerConfig& config,
                       const PolicyParams& policy, const AleatoricModel* alea,
                       const DynamicsEnsemble* ens)
    : config_(config), policy_(policy), alea_(alea), ens_(ens) {
  config_.Validate();
  const bool needs_models = config.kind == ControllerKind::kTotalU ||
                            config.kind == ControllerKind::kDecomposed;
  if (needs_models && (alea_ == nullptr || ens_ == nullptr)) {
    throw Error(ErrorCode::kConfiguration,
                std::string(ControllerName(config.kind)) +
                    " needs both fitted estimators");
  }
  if (ens_ != nullptr && !ens_->tau_epis.has_value()) {
    throw Error(ErrorCode::kConfiguration, "epistemic threshold uncalibrated");
  }
}

void Controller::Reset() {
  has_prev_ = false;
  prev_action_.setZero();
}

StepDecision Controller::Step(const PhysicsState& state,
                              const PerturbationConfig& config,
                              std::mt19937_64* sensor_rng) {
  StepDecision d;
  d.raw_obs = Observe(state, config, sensor_rng);
  if (alea_ != nullptr) {
    d.sigma_alea = AleaScore(*alea_, d.raw_obs);
    d.alea_fired = d.sigma_alea > alea_->tau_alea;
  }
  if (ens_ != nullptr && has_prev_) {
    d.epis_defined = true;
    d.sigma_epis = EpisScore(*ens_, prev_obs_, prev_action_, d.raw_obs);
    d.epis_fired = d.sigma_epis > *ens_->tau_epis;
  }
  switch (config_.kind) {
    case ControllerKind::kVanilla:
      break;
    case ControllerKind::kRecoveryOnly:
      d.recovery_applied = true;
      break;
    case ControllerKind::kDampenOnly:
      d.dampen_applied = true;
      break;
    case ControllerKind::kTotalU:
      d.recovery_applied = d.dampen_applied = d.alea_fired || d.epis_fired;
      break;
    case ControllerKind::kDecomposed:
      d.recovery_applied = d.alea_fired;
      d.dampen_applied = d.epis_fired;
      break;
  }
  d.used_obs = d.recovery_applied
                   ? ResampleObservation(state, config, sensor_rng,
                                         config_.n_resample)
                   : d.raw_obs;
  d.raw_action = FrozenPolicy(policy_, d.used_obs);
  d.final_action =
      d.dampen_applied ? Dampen(d.raw_action, config_.alpha) : d.raw_action;
  prev_obs_ = d.raw_obs;
  prev_action_ = d.final_action;
  has_prev_ = true;
  return d;
}

RuntimeCalibration RuntimeCalibrate(DynamicsEnsemble* ens, const Plant& plant,
                                    const PolicyParams& policy, int t_cal,
                                    double m_e, uint64_t seed) {
  if (t_cal < 100) {
    throw Error(ErrorCode::kCalibration, "T_cal must be >= 100");
  }
  const PerturbationConfig nominal = PerturbationConfig::Nominal();
  RuntimeCalibration out;
  out.scores.reserve(t_cal);
  try {
    for (uint64_t episode = 0; static_cast<int>(out.scores.size()) < t_cal;
         ++episode) {
      PhysicsState s = plant.Reset(nominal, HashSeed(seed, episode));
      std::mt19937_64 rng(HashSeed(seed, episode, 1));
      Eigen::VectorXd obs_prev;
      Eigen::Vector3d act_prev;
      for (int t = 0; t < plant.params().horizon; ++t) {
        const Eigen::VectorXd obs = Observe(s, nominal, &rng);
        if (t > 0) {
          out.scores.push_back(EpisScore(*ens, obs_prev, act_prev, obs));
          if (static_cast<int>(out.scores.size()) >= t_cal) break;
        }
        const Eigen::Vector3d a = FrozenPolicy(policy, obs);
        obs_prev = obs;
        act_prev = a;
        s = plant.Step(s, a, nominal);
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kCalibration,
                std::string("runtime calibration failed: ") + e.what());
  }
  out.tau_epis = ThresholdFromScores(out.scores, m_e);
  if (!(out.tau_epis > 0.0)) {
    throw Error(ErrorCode::kCalibration, "calibrated threshold is not > 0");
  }
  ens->tau_epis = out.tau_epis;
  ens->m_e = m_e;
  return out;
}

nlohmann::json PolicyParamsToJson(const PolicyParams& p) {
  return {{"kp_hold", p.kp_hold},
          {"kd_hold", p.kd_hold},
          {"ff_z", p.ff_z},
          {"kp_approach", p.kp_approach},
          {"kd_approach", p.kd_approach},
          {"max_delta", p.max_delta},
          {"close_radius", p.close_radius},
          {"close_speed", p.close_speed},
          {"release_radius", p.release_radius},
          {"hover", p.hover},
          {"align_tol", p.align_tol},
          {"grip_offset", {p.grip_offset.x(), p.grip_offset.y()}}};
}

PolicyParams PolicyParamsFromJson(const nlohmann::json& j) {
  PolicyParams p;
  p.kp_hold = j.value("kp_hold", p.kp_hold);
  p.kd_hold = j.value("kd_hold", p.kd_hold);
  p.ff_z = j.value("ff_z", p.ff_z);
  p.kp_approach = j.value("kp_approach", p.kp_approach);
  p.kd_approach = j.value("kd_approach", p.kd_approach);
  p.max_delta = j.value("max_delta", p.max_delta);
  p.close_radius = j.value("close_radius", p.close_radius);
  p.close_speed = j.value("close_speed", p.close_speed);
  p.release_radius = j.value("release_radius", p.release_radius);
  p.hover = j.value("hover", p.hover);
  p.align_tol = j.value("align_tol", p.align_tol);
  if (j.contains("grip_offset")) {
    p.grip_offset = Eigen::Vector2d(j["grip_offset"][0].get<double>(), j["grip_offset"][1].get<double>());
  }
  return p;
}

}  // namespace udc
