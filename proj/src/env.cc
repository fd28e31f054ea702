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

#include "udc/env.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "udc/error.h"

namespace udc {

const std::vector<int>& ActiveMask() {
  static const std::vector<int> mask = {0, 1, 2, 3, 4, 5, 7, 8, 9};
  return mask;
}

Eigen::VectorXd SensorSigma::PerComponent() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(kObsDim);
  s.segment<2>(kGripperPos).setConstant(gripper_pos);
  s.segment<2>(kGripperVel).setConstant(gripper_vel);
  s.segment<2>(kObjectPos).setConstant(object_pos);
  return s;
}

SensorSigma DefaultSensorSigma() { return {0.05, 0.1, 0.05}; }

void PerturbationConfig::Validate() const {
  const SensorSigma& s = sensor_sigma;
  if (!(s.gripper_pos >= 0.0 && s.gripper_vel >= 0.0 && s.object_pos >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "sensor sigmas must be >= 0");
  }
  if (!(mass_mult > 0.0 && friction_mult > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "multipliers must be > 0");
  }
}

Eigen::Vector3d ClampAction(const Eigen::Vector3d& action) {
  return action.cwiseMax(-1.0).cwiseMin(1.0);
}

PhysicsState Plant::Reset(const PerturbationConfig& config,
                          uint64_t seed) const {
  config.Validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(params_.object_x_lo,
                                            params_.object_x_hi);
  std::uniform_real_distribution<double> uq(params_.grip_quality_lo,
                                            params_.grip_quality_hi);
  PhysicsState s;
  s.gripper_pos = params_.gripper_start;
  s.object_pos = Eigen::Vector2d(ux(rng), 0.0);
  s.grip_quality = uq(rng);
  s.goal_height = params_.goal_height;
  return s;
}

PhysicsState Plant::Step(const PhysicsState& state,
                         const Eigen::Vector3d& action,
                         const PerturbationConfig& config) const {
  const PlantParams& p = params_;
  const Eigen::Vector3d a = ClampAction(action);
  const Eigen::Vector2d force = a.head<2>() * p.max_force;
  const double grasp_cmd = a(2);
  const double m_obj = p.object_mass * config.mass_mult;
  const double dt = p.dt;
  const Eigen::Vector2d down(0.0, -p.gravity);

  PhysicsState s = state;
  if (grasp_cmd < 0.0) {
    s.jaw_closed = false;
    s.grasped = false;
  }
  if (!s.grasped && !s.jaw_closed && grasp_cmd > 0.5) {
    s.jaw_closed = true;
    const double d = (s.object_pos - s.gripper_pos - p.grip_offset).norm();
    if (d <= p.grasp_radius) {
      s.grasped = true;
      s.slip = 0.0;
      s.slip_vel = 0.0;
      // Inelastic capture: the pair continues with the common momentum.
      const Eigen::Vector2d v =
          (p.gripper_mass * s.gripper_vel + m_obj * s.object_vel) /
          (p.gripper_mass + m_obj);
      s.gripper_vel = v;
      s.object_vel = v;
      s.object_pos = s.gripper_pos + p.grip_offset;
    }
  }

  if (s.grasped) {
    const Eigen::Vector2d acc =
        (force + m_obj * down) / (p.gripper_mass + m_obj);
    s.gripper_vel += acc * dt;
    s.gripper_pos += s.gripper_vel * dt;
    // The held object rests on the ground before the gripper does.
    const double floor_z = -p.grip_offset.y();
    bool on_ground = false;
    if (s.gripper_pos.y() <= floor_z) {
      s.gripper_pos.y() = floor_z;
      s.gripper_vel.y() = std::max(0.0, s.gripper_vel.y());
      on_ground = true;
    }
    const double load = m_obj * (acc - down).norm();
    const double capacity =
        p.grip_force * config.friction_mult * s.grip_quality;
    if (!on_ground && load > capacity) {
      s.slip_vel += (load - capacity) / m_obj * dt;
      s.slip += s.slip_vel * dt;
    } else {
      s.slip_vel = 0.0;
    }
    s.object_pos = s.gripper_pos + p.grip_offset;
    s.object_vel = s.gripper_vel;
    if (s.slip > p.slip_limit) {
      s.grasped = false;
      s.object_vel.y() -= s.slip_vel;
    }
  } else {
    s.gripper_vel += force / p.gripper_mass * dt;
    s.gripper_pos += s.gripper_vel * dt;
    if (s.gripper_pos.y() < 0.0) {
      s.gripper_pos.y() = 0.0;
      s.gripper_vel.y() = std::max(0.0, s.gripper_vel.y());
    }
    if (s.object_pos.y() > 0.0 || s.object_vel.y() > 0.0) {
      s.object_vel += down * dt;
      s.object_pos += s.object_vel * dt;
      if (s.object_pos.y() <= 0.0) {
        s.object_pos.y() = 0.0;
        s.object_vel.y() = 0.0;
      }
    } else {
      const double dv = p.ground_friction * config.friction_mult * p.gravity * dt;
      double& vx = s.object_vel.x();
      vx = (std::abs(vx) <= dv) ? 0.0 : vx - std::copysign(dv, vx);
      s.object_vel.y() = 0.0;
      s.object_pos.x() += vx * dt;
    }
  }
  s.prev_action = a;
  s.t += 1;

  if (!s.gripper_pos.allFinite() || !s.gripper_vel.allFinite() ||
      !s.object_pos.allFinite() || !s.object_vel.allFinite()) {
    throw Error(ErrorCode::kSimulationDiverged,
                "non-finite state at step " + std::to_string(s.t));
  }
  return s;
}

bool Plant::IsSuccess(const PhysicsState& state) const {
  return state.grasped && state.object_pos.y() >= params_.success_height;
}

Eigen::VectorXd PhysicsReadout(const PhysicsState& state) {
  Eigen::VectorXd o(kObsDim);
  o.segment<2>(kGripperPos) = state.gripper_pos;
  o.segment<2>(kGripperVel) = state.gripper_vel;
  o.segment<2>(kObjectPos) = state.object_pos;
  o(kGoalHeight) = state.goal_height;
  o.segment<3>(kPrevAction) = state.prev_action;
  return o;
}

Eigen::VectorXd Observe(const PhysicsState& state,
                        const PerturbationConfig& config,
                        std::mt19937_64* rng) {
  Eigen::VectorXd o = PhysicsReadout(state);
  if (!config.sensor_sigma.any()) return o;
  const Eigen::VectorXd sigma = config.sensor_sigma.PerComponent();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < kGoalHeight; ++i) o(i) += sigma(i) * normal(*rng);
  return o;
}

Eigen::VectorXd ResampleObservation(const PhysicsState& state,
                                    const PerturbationConfig& config,
                                    std::mt19937_64* rng, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "resample count < 1");
  if (!config.sensor_sigma.any()) return PhysicsReadout(state);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kObsDim);
  for (int i = 0; i < n; ++i) sum += Observe(state, config, rng);
  return sum / static_cast<double>(n);
}

nlohmann::json PerturbationToJson(const PerturbationConfig& c) {
  return {{"sensor_sigma",
           {{"gripper_pos", c.sensor_sigma.gripper_pos},
            {"gripper_vel", c.sensor_sigma.gripper_vel},
            {"object_pos", c.sensor_sigma.object_pos}}},
          {"mass_mult", c.mass_mult},
          {"friction_mult", c.friction_mult}};
}

PerturbationConfig PerturbationFromJson(const nlohmann::json& j) {
  PerturbationConfig c;
  if (j.contains("sensor_sigma")) {
    const nlohmann::json& s = j["sensor_sigma"];
    c.sensor_sigma.gripper_pos = s.value("gripper_pos", 0.0);
    c.sensor_sigma.gripper_vel = s.value("gripper_vel", 0.0);
    c.sensor_sigma.object_pos = s.value("object_pos", 0.0);
  }
  c.mass_mult = j.value("mass_mult", 1.0);
  c.friction_mult = j.value("friction_mult", 1.0);
  c.Validate();
  return c;
}

nlohmann::json PlantParamsToJson(const PlantParams& p) {
  return {{"dt", p.dt},
          {"horizon", p.horizon},
          {"gripper_mass", p.gripper_mass},
          {"object_mass", p.object_mass},
          {"max_force", p.max_force},
          {"gravity", p.gravity},
          {"ground_friction", p.ground_friction},
          {"grasp_radius", p.grasp_radius},
          {"grip_offset", {p.grip_offset.x(), p.grip_offset.y()}},
          {"grip_force", p.grip_force},
          {"slip_limit", p.slip_limit},
          {"grip_quality", {p.grip_quality_lo, p.grip_quality_hi}},
          {"gripper_start", {p.gripper_start.x(), p.gripper_start.y()}},
          {"object_x", {p.object_x_lo, p.object_x_hi}},
          {"goal_height", p.goal_height},
          {"success_height", p.success_height}};
}

PlantParams PlantParamsFromJson(const nlohmann::json& j) {
  PlantParams p;
  p.dt = j.value("dt", p.dt);
  p.horizon = j.value("horizon", p.horizon);
  p.gripper_mass = j.value("gripper_mass", p.gripper_mass);
  p.object_mass = j.value("object_mass", p.object_mass);
  p.max_force = j.value("max_force", p.max_force);
  p.gravity = j.value("gravity", p.gravity);
  p.ground_friction = j.value("ground_friction", p.ground_friction);
  p.grasp_radius = j.value("grasp_radius", p.grasp_radius);
  if (j.contains("grip_offset")) {
    p.grip_offset = Eigen::Vector2d(j["grip_offset"][0].get<double>(), j["grip_offset"][1].get<double>());
  }
  p.grip_force = j.value("grip_force", p.grip_force);
  p.slip_limit = j.value("slip_limit", p.slip_limit);
  if (j.contains("grip_quality")) {
    p.grip_quality_lo = j["grip_quality"][0].get<double>();
    p.grip_quality_hi = j["grip_quality"][1].get<double>();
  }
  if (j.contains("gripper_start")) {
    p.gripper_start = Eigen::Vector2d(j["gripper_start"][0].get<double>(), j["gripper_start"][1].get<double>());
  }
  if (j.contains("object_x")) {
    p.object_x_lo = j["object_x"][0].get<double>();
    p.object_x_hi = j["object_x"][1].get<double>();
  }
  p.goal_height = j.value("goal_height", p.goal_height);
  p.success_height = j.value("success_height", p.success_height);
  if (!(p.dt > 0.0) || p.horizon <= 0 || !(p.max_force > 0.0)) {
    throw Error(ErrorCode::kConfiguration, "invalid plant parameters");
  }
  return p;
}

}  // namespace udc
