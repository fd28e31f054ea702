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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "udc/error.h"
#include "udc/stats.h"

namespace udc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Identity-covariance model around the origin; the threshold decides firing.
AleatoricModel HandAleatoric(double tau) {
  AleatoricOptions opt;
  opt.lambda = 1.0;
  AleatoricModel m = FitAleatoric(
      std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(kObsDim)),
      ActiveMask(), opt);
  m.tau_alea = tau;
  return m;
}

// Single zero-output member over the active mask.
DynamicsEnsemble HandEnsemble(double tau) {
  DynamicsEnsemble ens;
  ens.mask = ActiveMask();
  ens.reliable_dims = ens.mask;
  const int m = static_cast<int>(ens.mask.size());
  ens.members.push_back(MakeZeroNetwork({m + kActDim, 4, m}));
  ens.action_dim = kActDim;
  ens.noise_sigma = Eigen::VectorXd::Zero(kObsDim);
  ens.tau_epis = tau;
  return ens;
}

PerturbationConfig Sensor() {
  PerturbationConfig c;
  c.sensor_sigma = DefaultSensorSigma();
  return c;
}

// Runs one controller for `steps` steps of a fixed open-loop plant rollout so
// that every controller sees the same states and sensor draws.
std::vector<StepDecision> Drive(Controller* ctl,
                                const PerturbationConfig& config,
                                uint64_t seed, int steps = 60) {
  Plant plant;
  PhysicsState s = plant.Reset(config, seed);
  std::mt19937_64 rng(HashSeed(seed, 1));
  std::vector<StepDecision> out;
  ctl->Reset();
  for (int t = 0; t < steps; ++t) {
    out.push_back(ctl->Step(s, config, &rng));
    s = plant.Step(s, out.back().final_action, config);
  }
  return out;
}

TEST(DampenTest, Examples) {
  const Eigen::Vector3d a(1.0, -2.0, 0.5);
  const Eigen::Vector3d d = Dampen(a, 0.3);
  EXPECT_NEAR(d(0), 0.7, 1e-15);
  EXPECT_NEAR(d(1), -1.4, 1e-15);
  EXPECT_NEAR(d(2), 0.35, 1e-15);
  EXPECT_EQ(Dampen(a, 0.0), a);
  EXPECT_EQ(Dampen(a, 1.0), Eigen::Vector3d::Zero());
  EXPECT_THROW(Dampen(a, -0.1), Error);
  EXPECT_THROW(Dampen(a, 1.5), Error);
  EXPECT_THROW(Dampen(a, std::nan("")), Error);
}

TEST(FrozenPolicyTest, ClosesWhenAlignedAndSlow) {
  PolicyParams p;
  Eigen::VectorXd o = Eigen::VectorXd::Zero(kObsDim);
  o.segment<2>(kGripperPos) = Eigen::Vector2d(0.3, 0.02);
  o.segment<2>(kObjectPos) = Eigen::Vector2d(0.3, 0.0);
  o(kGoalHeight) = 0.3;
  o(kPrevAction + 2) = -1.0;
  EXPECT_GT(FrozenPolicy(p, o)(2), 0.5);
  // Far away: jaw stays open.
  o.segment<2>(kGripperPos) = Eigen::Vector2d(0.0, 0.3);
  EXPECT_LT(FrozenPolicy(p, o)(2), 0.5);
}

TEST(FrozenPolicyTest, DeterministicAndBounded) {
  PolicyParams p;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd o(kObsDim);
    for (int k = 0; k < kObsDim; ++k) o(k) = normal(rng);
    const Eigen::Vector3d a = FrozenPolicy(p, o);
    EXPECT_EQ(a, FrozenPolicy(p, o));
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 1.0);
  }
  EXPECT_THROW(FrozenPolicy(p, Eigen::VectorXd::Zero(3)), Error);
}

TEST(FrozenPolicyTest, NominalClosedLoopSucceeds) {
  Plant plant;
  const ControllerConfig cfg;  // vanilla
  Controller ctl(cfg, PolicyParams(), nullptr, nullptr);
  int successes = 0;
  const int episodes = 1000;
  for (int ep = 0; ep < episodes; ++ep) {
    PhysicsState s = plant.Reset(PerturbationConfig::Nominal(), HashSeed(5, ep));
    std::mt19937_64 rng(HashSeed(5, ep, 1));
    ctl.Reset();
    for (int t = 0; t < plant.params().horizon; ++t) {
      s = plant.Step(s, ctl.Step(s, PerturbationConfig::Nominal(), &rng)
                            .final_action,
                     PerturbationConfig::Nominal());
    }
    successes += plant.IsSuccess(s);
  }
  EXPECT_GE(successes, 990);
}

TEST(ControllerTest, ValidatesConfigAndModels) {
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kDecomposed;
  EXPECT_THROW(Controller(cfg, PolicyParams(), nullptr, nullptr), Error);
  const AleatoricModel alea = HandAleatoric(1.0);
  DynamicsEnsemble ens = HandEnsemble(1.0);
  ens.tau_epis.reset();
  EXPECT_THROW(Controller(cfg, PolicyParams(), &alea, &ens), Error);
  cfg.kind = ControllerKind::kVanilla;
  cfg.alpha = 2.0;
  EXPECT_THROW(Controller(cfg, PolicyParams(), nullptr, nullptr), Error);
  cfg.alpha = 0.3;
  cfg.n_resample = 0;
  EXPECT_THROW(Controller(cfg, PolicyParams(), nullptr, nullptr), Error);
}

TEST(ControllerTest, EpisUndefinedOnFirstStep) {
  const AleatoricModel alea = HandAleatoric(kInf);
  const DynamicsEnsemble ens = HandEnsemble(-1.0);
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kDecomposed;
  Controller ctl(cfg, PolicyParams(), &alea, &ens);
  const auto steps = Drive(&ctl, Sensor(), 1, 3);
  EXPECT_FALSE(steps[0].epis_defined);
  EXPECT_FALSE(steps[0].epis_fired);
  EXPECT_FALSE(steps[0].dampen_applied);
  EXPECT_TRUE(steps[1].epis_defined);
  EXPECT_TRUE(steps[1].epis_fired);
}

TEST(ControllerTest, DecomposedQuietEqualsVanilla) {
  const AleatoricModel alea = HandAleatoric(kInf);
  const DynamicsEnsemble ens = HandEnsemble(kInf);
  ControllerConfig dec;
  dec.kind = ControllerKind::kDecomposed;
  Controller a(dec, PolicyParams(), &alea, &ens);
  Controller b(ControllerConfig(), PolicyParams(), nullptr, nullptr);
  const auto x = Drive(&a, Sensor(), 2, 200);
  const auto y = Drive(&b, Sensor(), 2, 200);
  for (size_t t = 0; t < x.size(); ++t) {
    ASSERT_FALSE(x[t].alea_fired || x[t].epis_fired);
    EXPECT_EQ(x[t].final_action, y[t].final_action);
    EXPECT_EQ(x[t].final_action, FrozenPolicy(PolicyParams(), x[t].raw_obs));
  }
}

TEST(ControllerTest, TotalUDampensOnAleatoricAlone) {
  const AleatoricModel alea = HandAleatoric(-1.0);
  const DynamicsEnsemble ens = HandEnsemble(kInf);
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kTotalU;
  Controller ctl(cfg, PolicyParams(), &alea, &ens);
  for (const StepDecision& d : Drive(&ctl, Sensor(), 3)) {
    EXPECT_TRUE(d.alea_fired);
    EXPECT_FALSE(d.epis_fired);
    EXPECT_TRUE(d.recovery_applied);
    EXPECT_TRUE(d.dampen_applied);
  }
}

TEST(ControllerTest, DecomposedRoutesEachSignal) {
  for (double ta : {-1.0, kInf}) {
    for (double te : {-1.0, kInf}) {
      const AleatoricModel alea = HandAleatoric(ta);
      const DynamicsEnsemble ens = HandEnsemble(te);
      ControllerConfig cfg;
      cfg.kind = ControllerKind::kDecomposed;
      Controller ctl(cfg, PolicyParams(), &alea, &ens);
      for (const StepDecision& d : Drive(&ctl, Sensor(), 4)) {
        EXPECT_EQ(d.recovery_applied, d.alea_fired);
        EXPECT_EQ(d.dampen_applied, d.epis_fired);
      }
    }
  }
}

TEST(ControllerTest, TotalUIsSupersetOfDecomposed) {
  for (double ta : {-1.0, kInf}) {
    for (double te : {-1.0, kInf}) {
      const AleatoricModel alea = HandAleatoric(ta);
      const DynamicsEnsemble ens = HandEnsemble(te);
      ControllerConfig dec, tot;
      dec.kind = ControllerKind::kDecomposed;
      tot.kind = ControllerKind::kTotalU;
      Controller a(dec, PolicyParams(), &alea, &ens);
      Controller b(tot, PolicyParams(), &alea, &ens);
      // Step both from the same states so the trigger pattern matches.
      Plant plant;
      PhysicsState s = plant.Reset(Sensor(), 9);
      std::mt19937_64 ra(1), rb(1);
      for (int t = 0; t < 50; ++t) {
        const StepDecision x = a.Step(s, Sensor(), &ra);
        const StepDecision y = b.Step(s, Sensor(), &rb);
        ASSERT_EQ(x.alea_fired, y.alea_fired);
        ASSERT_EQ(x.epis_fired, y.epis_fired);
        EXPECT_TRUE(!x.recovery_applied || y.recovery_applied);
        EXPECT_TRUE(!x.dampen_applied || y.dampen_applied);
        s = plant.Step(s, x.final_action, Sensor());
      }
    }
  }
}

TEST(ControllerTest, FixedInterventionsApplyEveryStep) {
  ControllerConfig rec, damp;
  rec.kind = ControllerKind::kRecoveryOnly;
  damp.kind = ControllerKind::kDampenOnly;
  Controller a(rec, PolicyParams(), nullptr, nullptr);
  Controller b(damp, PolicyParams(), nullptr, nullptr);
  for (const StepDecision& d : Drive(&a, Sensor(), 5)) {
    EXPECT_TRUE(d.recovery_applied);
    EXPECT_FALSE(d.dampen_applied);
    EXPECT_EQ(d.sigma_alea, 0.0);
  }
  for (const StepDecision& d : Drive(&b, Sensor(), 5)) {
    EXPECT_FALSE(d.recovery_applied);
    EXPECT_TRUE(d.dampen_applied);
    EXPECT_EQ(d.final_action, Dampen(d.raw_action, 0.3));
  }
}

TEST(ControllerTest, RecoveryRunsBeforePolicyAndDampenAfter) {
  const AleatoricModel alea = HandAleatoric(-1.0);
  const DynamicsEnsemble ens = HandEnsemble(-1.0);
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kDecomposed;
  cfg.alpha = 0.5;
  Controller ctl(cfg, PolicyParams(), &alea, &ens);
  // Nominal sensors make the resampled observation the exact readout.
  Plant plant;
  PhysicsState s = plant.Reset(PerturbationConfig::Nominal(), 6);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const StepDecision d = ctl.Step(s, PerturbationConfig::Nominal(), &rng);
    EXPECT_EQ(d.used_obs, PhysicsReadout(s));
    EXPECT_EQ(d.raw_action, FrozenPolicy(PolicyParams(), d.used_obs));
    if (t > 0) {
      EXPECT_EQ(d.final_action, Dampen(d.raw_action, 0.5));
    }
    s = plant.Step(s, d.final_action, PerturbationConfig::Nominal());
  }
}

TEST(ControllerTest, EpisScoresRawObservation) {
  const AleatoricModel alea = HandAleatoric(-1.0);
  const DynamicsEnsemble ens = HandEnsemble(kInf);
  ControllerConfig cfg;
  cfg.kind = ControllerKind::kDecomposed;
  Controller ctl(cfg, PolicyParams(), &alea, &ens);
  const auto steps = Drive(&ctl, Sensor(), 7, 10);
  for (size_t t = 1; t < steps.size(); ++t) {
    const double oracle = EpisScore(ens, steps[t - 1].raw_obs,
                                    steps[t - 1].final_action, steps[t].raw_obs);
    EXPECT_EQ(steps[t].sigma_epis, oracle);
  }
}

TEST(ControllerNameTest, RoundTrip) {
  for (ControllerKind k : AllControllerKinds()) {
    EXPECT_EQ(ParseControllerKind(ControllerName(k)), k);
  }
  EXPECT_THROW(ParseControllerKind("bogus"), Error);
}

TEST(RuntimeCalibrateTest, ThresholdFromCollectedScores) {
  DynamicsEnsemble ens = HandEnsemble(kInf);
  ens.tau_epis.reset();
  const RuntimeCalibration rc =
      RuntimeCalibrate(&ens, Plant(), PolicyParams(), 300, 1.5, 11);
  ASSERT_EQ(rc.scores.size(), 300u);
  EXPECT_EQ(rc.tau_epis, NearestRankPercentile(rc.scores, 95.0) * 1.5);
  ASSERT_TRUE(ens.tau_epis.has_value());
  EXPECT_EQ(*ens.tau_epis, rc.tau_epis);
  EXPECT_THROW(RuntimeCalibrate(&ens, Plant(), PolicyParams(), 50, 1.5, 11),
               Error);
}

TEST(PolicyJsonTest, RoundTrip) {
  PolicyParams p;
  p.kp_hold = 7.25;
  p.grip_offset = Eigen::Vector2d(0.01, -0.03);
  const PolicyParams back = PolicyParamsFromJson(PolicyParamsToJson(p));
  EXPECT_EQ(back.kp_hold, 7.25);
  EXPECT_EQ(back.grip_offset, p.grip_offset);
  EXPECT_EQ(back.max_delta, p.max_delta);
}

}  // namespace
}  // namespace udc
