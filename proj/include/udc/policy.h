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

// The frozen scripted lift policy and the controllers that wrap it with
// observation recovery and action dampening.

#ifndef UDC_POLICY_H_
#define UDC_POLICY_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "udc/aleatoric.h"
#include "udc/env.h"
#include "udc/epistemic.h"

namespace udc {

struct PolicyParams {
  // Hold phase: PD toward the goal height with gravity feed-forward.
  double kp_hold = 8.0;
  double kd_hold = 1.6;
  double ff_z = 0.327;
  // Approach phase.
  double kp_approach = 6.0;
  double kd_approach = 1.6;
  // Per-step limit on the change of the force command.
  double max_delta = 0.3;
  double close_radius = 0.02;
  double close_speed = 0.3;
  // Observed separation beyond which a held grasp is abandoned.
  double release_radius = 0.25;
  double hover = 0.08;
  double align_tol = 0.03;
  Eigen::Vector2d grip_offset{0.0, -0.02};
};

// Three-phase PD controller: approach above the object, descend and close,
// then lift toward the goal height. Pure function of the observation; the
// previous action in the observation supplies the phase memory.
Eigen::Vector3d FrozenPolicy(const PolicyParams& params,
                             const Eigen::VectorXd& obs);

// a' = (1 - alpha) * a.
Eigen::Vector3d Dampen(const Eigen::Vector3d& action, double alpha);

enum class ControllerKind {
  kVanilla,
  kRecoveryOnly,
  kDampenOnly,
  kTotalU,
  kDecomposed,
};

const char* ControllerName(ControllerKind kind);
ControllerKind ParseControllerKind(const std::string& name);
const std::vector<ControllerKind>& AllControllerKinds();

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kVanilla;
  double alpha = 0.30;
  int n_resample = 5;

  void Validate() const;
};

struct StepDecision {
  bool alea_fired = false;
  bool epis_fired = false;
  bool recovery_applied = false;
  bool dampen_applied = false;
  Eigen::Vector3d raw_action = Eigen::Vector3d::Zero();
  Eigen::Vector3d final_action = Eigen::Vector3d::Zero();
  Eigen::VectorXd raw_obs;
  Eigen::VectorXd used_obs;
  double sigma_alea = 0.0;
  double sigma_epis = 0.0;
  bool epis_defined = false;  // false on the first step of an episode
};

// Per-episode controller. Models are borrowed and must outlive it; either
// may be null for kinds that never consult it, in which case the matching
// signal is reported as 0 and never fires.
class Controller {
 public:
  Controller(const ControllerConfig& config, const PolicyParams& policy,
             const AleatoricModel* alea, const DynamicsEnsemble* ens);

  void Reset();

  // Observes `state`, computes both signals, applies the interventions
  // selected by the controller kind and returns the audit record.
  StepDecision Step(const PhysicsState& state, const PerturbationConfig& config,
                    std::mt19937_64* sensor_rng);

  const ControllerConfig& config() const { return config_; }

 private:
  ControllerConfig config_;
  PolicyParams policy_;
  const AleatoricModel* alea_;
  const DynamicsEnsemble* ens_;
  bool has_prev_ = false;
  Eigen::VectorXd prev_obs_;
  Eigen::Vector3d prev_action_ = Eigen::Vector3d::Zero();
};

struct RuntimeCalibration {
  double tau_epis = 0.0;
  std::vector<double> scores;
};

// Runs the frozen policy closed-loop under nominal conditions, chaining
// episodes until t_cal epistemic scores are collected, and sets
// ens->tau_epis to Q95(scores) * m_e.
RuntimeCalibration RuntimeCalibrate(DynamicsEnsemble* ens, const Plant& plant,
                                    const PolicyParams& policy, int t_cal,
                                    double m_e, uint64_t seed);

nlohmann::json PolicyParamsToJson(const PolicyParams& params);
PolicyParams PolicyParamsFromJson(const nlohmann::json& j);

}  // namespace udc

#endif  // UDC_POLICY_H_
