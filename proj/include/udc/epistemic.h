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

// Forward-dynamics ensemble that predicts the change of the active
// observation components. Members are trained on inputs corrupted at several
// multiples of the sensor noise profile, always against the clean target.
// The score is the RMSE of the ensemble-mean prediction over the reliably
// predicted dimensions.

#ifndef UDC_EPISTEMIC_H_
#define UDC_EPISTEMIC_H_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "udc/aleatoric.h"
#include "udc/mlp.h"

namespace udc {

struct EnsembleConfig {
  int members = 5;
  std::vector<int> hidden = {64, 64};
  TrainConfig train;
  double holdout_fraction = 0.1;
  double r2_threshold = 0.3;
  std::vector<double> noise_levels = {0.0, 1.0, 2.0};
  double m_e = 1.5;
  int workers = 1;
};

struct DynamicsEnsemble {
  std::vector<Network> members;
  std::vector<int> mask;           // observation indices used as inputs/outputs
  std::vector<int> reliable_dims;  // observation indices, subset of mask
  std::vector<double> r2_per_dim;  // aligned with mask
  std::optional<double> tau_epis;
  double m_e = 1.5;
  Eigen::VectorXd noise_sigma;  // per observation component
  std::vector<double> noise_levels;
  int action_dim = 0;

  // Positions of reliable_dims within mask.
  std::vector<int> ReliablePositions() const;
};

struct AugmentedSet {
  Eigen::MatrixXd inputs;   // one row per (masked obs, action) component
  Eigen::MatrixXd targets;  // clean masked obs change
};

// Three rows per transition (one per noise level), all sharing the clean
// target. Column order: level-major within each transition.
AugmentedSet BuildAugmentedDataset(const CalibrationSet& cal,
                                   const std::vector<int>& mask,
                                   const Eigen::VectorXd& sigma_profile,
                                   const std::vector<double>& noise_levels,
                                   std::mt19937_64* rng);

DynamicsEnsemble FitEnsemble(const CalibrationSet& cal,
                             const std::vector<int>& mask,
                             const Eigen::VectorXd& sigma_profile,
                             const EnsembleConfig& config, uint64_t seed);

// Member-mean prediction of the masked observation change.
Eigen::VectorXd EnsembleMean(const DynamicsEnsemble& ens,
                             const Eigen::VectorXd& obs_prev,
                             const Eigen::VectorXd& action_prev);

double EpisScore(const DynamicsEnsemble& ens, const Eigen::VectorXd& obs_prev,
                 const Eigen::VectorXd& action_prev,
                 const Eigen::VectorXd& obs_cur);

// Strictly greater than tau_epis; throws if uncalibrated.
bool EpisTrigger(const DynamicsEnsemble& ens, const Eigen::VectorXd& obs_prev,
                 const Eigen::VectorXd& action_prev,
                 const Eigen::VectorXd& obs_cur);

// Nearest-rank 95th percentile of `scores` times m_e.
double ThresholdFromScores(const std::vector<double>& scores, double m_e);

// Scores of the calibration transitions themselves.
std::vector<double> OfflineScores(const DynamicsEnsemble& ens,
                                  const CalibrationSet& cal);

// Per-dimension R^2 of the ensemble mean on the given transitions.
std::vector<double> R2PerDim(const DynamicsEnsemble& ens,
                             const std::vector<Transition>& transitions);

nlohmann::json EnsembleToJson(const DynamicsEnsemble& ens);
DynamicsEnsemble EnsembleFromJson(const nlohmann::json& j);

}  // namespace udc

#endif  // UDC_EPISTEMIC_H_
