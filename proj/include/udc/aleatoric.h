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

// Observation-density score: Mahalanobis distance of the active observation
// components from the nominal calibration distribution.

#ifndef UDC_ALEATORIC_H_
#define UDC_ALEATORIC_H_

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace udc {

struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
  Eigen::VectorXd next_obs;
};

struct CalibrationSet {
  std::vector<Transition> transitions;

  int size() const { return static_cast<int>(transitions.size()); }
  std::vector<Eigen::VectorXd> Observations() const;
};

struct AleatoricModel {
  std::vector<int> mask;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;      // biased covariance + lambda * I
  Eigen::MatrixXd sigma_inv;
  double lambda = 1e-6;
  double percentile = 95.0;
  double m_a = 1.0;
  double tau_alea = 0.0;
  std::vector<double> calib_scores;  // sorted ascending
};

struct AleatoricOptions {
  double lambda = 1e-6;
  double percentile = 95.0;
  double m_a = 1.0;
};

// Fits mean and regularized covariance over `mask` and sets the threshold to
// the nearest-rank percentile of the in-sample scores times m_a.
AleatoricModel FitAleatoric(const std::vector<Eigen::VectorXd>& observations,
                            const std::vector<int>& mask,
                            const AleatoricOptions& options = {});
AleatoricModel FitAleatoric(const CalibrationSet& cal,
                            const std::vector<int>& mask,
                            const AleatoricOptions& options = {});

double AleaScore(const AleatoricModel& model, const Eigen::VectorXd& obs);

// Strictly greater than the threshold.
bool AleaTrigger(const AleatoricModel& model, const Eigen::VectorXd& obs);

nlohmann::json AleatoricToJson(const AleatoricModel& model);
AleatoricModel AleatoricFromJson(const nlohmann::json& j);

// Gathers obs[mask[i]] into a dense vector.
Eigen::VectorXd Gather(const Eigen::VectorXd& obs, const std::vector<int>& mask);

}  // namespace udc

#endif  // UDC_ALEATORIC_H_
