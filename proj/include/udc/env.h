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

// Planar lift plant: a force-driven gripper that grasps an object resting on
// the ground and lifts it. Observations come from a two-stage pipeline, a
// noiseless physics readout followed by an additive Gaussian sensor model.

#ifndef UDC_ENV_H_
#define UDC_ENV_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace udc {

// Observation layout.
inline constexpr int kObsDim = 10;
inline constexpr int kActDim = 3;
inline constexpr int kGripperPos = 0;  // (x, z)
inline constexpr int kGripperVel = 2;  // (vx, vz)
inline constexpr int kObjectPos = 4;   // (x, z)
inline constexpr int kGoalHeight = 6;
inline constexpr int kPrevAction = 7;  // (fx, fz, grasp)

// Indices of the non-constant observation components.
const std::vector<int>& ActiveMask();

struct SensorSigma {
  double gripper_pos = 0.0;  // m
  double gripper_vel = 0.0;  // m/s
  double object_pos = 0.0;   // m

  bool any() const {
    return gripper_pos > 0.0 || gripper_vel > 0.0 || object_pos > 0.0;
  }
  SensorSigma Scaled(double k) const {
    return {gripper_pos * k, gripper_vel * k, object_pos * k};
  }
  // Per-component std-devs over the full 10-dim observation.
  Eigen::VectorXd PerComponent() const;
};

// Default sensor perturbation profile.
SensorSigma DefaultSensorSigma();

struct PerturbationConfig {
  SensorSigma sensor_sigma;
  double mass_mult = 1.0;
  double friction_mult = 1.0;

  static PerturbationConfig Nominal() { return {}; }
  void Validate() const;
};

struct PlantParams {
  double dt = 0.02;
  int horizon = 200;
  double gripper_mass = 1.0;
  double object_mass = 0.5;
  double max_force = 15.0;
  double gravity = 9.81;
  double ground_friction = 0.5;
  double grasp_radius = 0.05;
  // Object position relative to the gripper while held.
  Eigen::Vector2d grip_offset{0.0, -0.02};
  // Tangential grip capacity in N, scaled by friction_mult and the
  // per-episode grip quality.
  double grip_force = 11.5;
  double slip_limit = 0.015;
  double grip_quality_lo = 0.8;
  double grip_quality_hi = 1.2;
  Eigen::Vector2d gripper_start{0.0, 0.3};
  double object_x_lo = 0.2;
  double object_x_hi = 0.5;
  double goal_height = 0.3;
  double success_height = 0.2;
};

struct PhysicsState {
  Eigen::Vector2d gripper_pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d gripper_vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d object_pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d object_vel = Eigen::Vector2d::Zero();
  bool grasped = false;
  int t = 0;
  // Jaw bookkeeping: a closed jaw must be reopened (grasp < 0) before it can
  // close again.
  bool jaw_closed = false;
  double grip_quality = 1.0;
  // Accumulated slip of the held object against the jaws; the grip is lost
  // once it exceeds slip_limit.
  double slip = 0.0;
  double slip_vel = 0.0;
  double goal_height = 0.0;
  Eigen::Vector3d prev_action = Eigen::Vector3d::Zero();
};

Eigen::Vector3d ClampAction(const Eigen::Vector3d& action);

class Plant {
 public:
  Plant() = default;
  explicit Plant(const PlantParams& params) : params_(params) {}

  const PlantParams& params() const { return params_; }

  PhysicsState Reset(const PerturbationConfig& config, uint64_t seed) const;

  // Semi-implicit Euler step (velocity first). Throws kSimulationDiverged on
  // a non-finite successor.
  PhysicsState Step(const PhysicsState& state, const Eigen::Vector3d& action,
                    const PerturbationConfig& config) const;

  bool IsSuccess(const PhysicsState& state) const;

 private:
  PlantParams params_;
};

// Noiseless observation of the physics state.
Eigen::VectorXd PhysicsReadout(const PhysicsState& state);

// Physics readout plus independent Gaussian noise on the sensed groups.
Eigen::VectorXd Observe(const PhysicsState& state,
                        const PerturbationConfig& config, std::mt19937_64* rng);

// Mean of n independent Observe() draws from the same physics state.
Eigen::VectorXd ResampleObservation(const PhysicsState& state,
                                    const PerturbationConfig& config,
                                    std::mt19937_64* rng, int n);

nlohmann::json PerturbationToJson(const PerturbationConfig& config);
PerturbationConfig PerturbationFromJson(const nlohmann::json& j);
nlohmann::json PlantParamsToJson(const PlantParams& params);
PlantParams PlantParamsFromJson(const nlohmann::json& j);

}  // namespace udc

#endif  // UDC_ENV_H_
