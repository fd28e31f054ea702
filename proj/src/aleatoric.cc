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

#include "udc/aleatoric.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "udc/error.h"
#include "udc/stats.h"

namespace udc {

namespace {

nlohmann::json MatrixToJson(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (int c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

double Quadratic(const AleatoricModel& model, const Eigen::VectorXd& d) {
  return std::sqrt(std::max(0.0, d.dot(model.sigma_inv * d)));
}

}  // namespace

std::vector<Eigen::VectorXd> CalibrationSet::Observations() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(transitions.size());
  for (const Transition& t : transitions) out.push_back(t.obs);
  return out;
}

Eigen::VectorXd Gather(const Eigen::VectorXd& obs,
                       const std::vector<int>& mask) {
  Eigen::VectorXd out(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] < 0 || mask[i] >= obs.size()) {
      throw Error(ErrorCode::kInvalidInput, "mask index out of range");
    }
    out(i) = obs(mask[i]);
  }
  return out;
}

AleatoricModel FitAleatoric(const std::vector<Eigen::VectorXd>& observations,
                            const std::vector<int>& mask,
                            const AleatoricOptions& options) {
  const int dim = static_cast<int>(mask.size());
  const int n = static_cast<int>(observations.size());
  if (dim == 0) throw Error(ErrorCode::kInvalidInput, "empty mask");
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "no calibration data");
  if (!(options.lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "lambda must be > 0");
  }
  AleatoricModel model;
  model.mask = mask;
  model.lambda = options.lambda;
  model.percentile = options.percentile;
  model.m_a = options.m_a;

  Eigen::MatrixXd x(dim, n);
  for (int i = 0; i < n; ++i) x.col(i) = Gather(observations[i], mask);
  if (!x.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "non-finite calibration data");
  }
  model.mu = x.rowwise().sum() / static_cast<double>(n);
  const Eigen::MatrixXd centered = x.colwise() - model.mu;
  model.sigma = centered * centered.transpose() / static_cast<double>(n);
  model.sigma.diagonal().array() += options.lambda;

  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumeric, "regularized covariance is not SPD");
  }
  model.sigma_inv = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  model.sigma_inv = 0.5 * (model.sigma_inv + model.sigma_inv.transpose());

  model.calib_scores.resize(n);
  for (int i = 0; i < n; ++i) {
    model.calib_scores[i] = Quadratic(model, centered.col(i));
  }
  std::sort(model.calib_scores.begin(), model.calib_scores.end());
  model.tau_alea =
      NearestRankPercentile(model.calib_scores, options.percentile) *
      options.m_a;
  return model;
}

AleatoricModel FitAleatoric(const CalibrationSet& cal,
                            const std::vector<int>& mask,
                            const AleatoricOptions& options) {
  if (cal.size() < static_cast<int>(mask.size()) + 1) {
    throw Error(ErrorCode::kInvalidInput,
                "calibration set smaller than mask dimension + 1");
  }
  return FitAleatoric(cal.Observations(), mask, options);
}

double AleaScore(const AleatoricModel& model, const Eigen::VectorXd& obs) {
  if (!obs.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "non-finite observation");
  }
  return Quadratic(model, Gather(obs, model.mask) - model.mu);
}

bool AleaTrigger(const AleatoricModel& model, const Eigen::VectorXd& obs) {
  return AleaScore(model, obs) > model.tau_alea;
}

nlohmann::json AleatoricToJson(const AleatoricModel& model) {
  return {{"mask", model.mask},
          {"mu", std::vector<double>(model.mu.data(),
                                     model.mu.data() + model.mu.size())},
          {"sigma", MatrixToJson(model.sigma)},
          {"sigma_inv", MatrixToJson(model.sigma_inv)},
          {"lambda", model.lambda},
          {"percentile", model.percentile},
          {"m_a", model.m_a},
          {"tau_alea", model.tau_alea},
          {"calib_scores", model.calib_scores}};
}

AleatoricModel AleatoricFromJson(const nlohmann::json& j) {
  AleatoricModel model;
  model.mask = j.at("mask").get<std::vector<int>>();
  std::vector<double> mu = j.at("mu").get<std::vector<double>>();
  model.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), mu.size());
  model.sigma = MatrixFromJson(j.at("sigma"));
  model.sigma_inv = MatrixFromJson(j.at("sigma_inv"));
  model.lambda = j.at("lambda").get<double>();
  model.percentile = j.at("percentile").get<double>();
  model.m_a = j.at("m_a").get<double>();
  model.tau_alea = j.at("tau_alea").get<double>();
  model.calib_scores = j.value("calib_scores", std::vector<double>{});
  const int dim = static_cast<int>(model.mask.size());
  if (model.mu.size() != dim || model.sigma.rows() != dim ||
      model.sigma_inv.rows() != dim) {
    throw Error(ErrorCode::kInvalidInput, "aleatoric json dimension mismatch");
  }
  return model;
}

}  // namespace udc
