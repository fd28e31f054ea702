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

#include "udc/epistemic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "udc/error.h"
#include "udc/parallel.h"
#include "udc/stats.h"

namespace udc {

namespace {

Eigen::VectorXd InputVector(const DynamicsEnsemble& ens,
                            const Eigen::VectorXd& obs,
                            const Eigen::VectorXd& action) {
  const int m = static_cast<int>(ens.mask.size());
  if (action.size() != ens.action_dim) {
    throw Error(ErrorCode::kInvalidInput, "action dimension mismatch");
  }
  Eigen::VectorXd x(m + ens.action_dim);
  x.head(m) = Gather(obs, ens.mask);
  x.tail(ens.action_dim) = action;
  return x;
}

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::vector<int> DynamicsEnsemble::ReliablePositions() const {
  std::vector<int> pos;
  for (int d : reliable_dims) {
    auto it = std::find(mask.begin(), mask.end(), d);
    if (it == mask.end()) {
      throw Error(ErrorCode::kConfiguration, "reliable dim outside mask");
    }
    pos.push_back(static_cast<int>(it - mask.begin()));
  }
  return pos;
}

AugmentedSet BuildAugmentedDataset(const CalibrationSet& cal,
                                   const std::vector<int>& mask,
                                   const Eigen::VectorXd& sigma_profile,
                                   const std::vector<double>& noise_levels,
                                   std::mt19937_64* rng) {
  if (cal.size() == 0) throw Error(ErrorCode::kInvalidInput, "empty D_cal");
  const int m = static_cast<int>(mask.size());
  const int a_dim = static_cast<int>(cal.transitions[0].action.size());
  const int levels = static_cast<int>(noise_levels.size());
  const Eigen::VectorXd sigma = Gather(sigma_profile, mask);
  AugmentedSet out;
  out.inputs.resize(m + a_dim, static_cast<Eigen::Index>(cal.size()) * levels);
  out.targets.resize(m, out.inputs.cols());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index col = 0;
  for (const Transition& t : cal.transitions) {
    const Eigen::VectorXd o = Gather(t.obs, mask);
    const Eigen::VectorXd target = Gather(t.next_obs, mask) - o;
    for (double level : noise_levels) {
      Eigen::VectorXd noisy = o;
      if (level != 0.0) {
        for (int i = 0; i < m; ++i) {
          if (sigma(i) > 0.0) noisy(i) += level * sigma(i) * normal(*rng);
        }
      }
      out.inputs.col(col).head(m) = noisy;
      out.inputs.col(col).tail(a_dim) = t.action;
      out.targets.col(col) = target;
      ++col;
    }
  }
  return out;
}

DynamicsEnsemble FitEnsemble(const CalibrationSet& cal,
                             const std::vector<int>& mask,
                             const Eigen::VectorXd& sigma_profile,
                             const EnsembleConfig& config, uint64_t seed) {
  if (config.members < 1) {
    throw Error(ErrorCode::kInvalidInput, "ensemble needs >= 1 member");
  }
  if (cal.size() < 20) {
    throw Error(ErrorCode::kInvalidInput, "D_cal too small for a holdout split");
  }
  DynamicsEnsemble ens;
  ens.mask = mask;
  ens.m_e = config.m_e;
  ens.noise_sigma = sigma_profile;
  ens.noise_levels = config.noise_levels;
  ens.action_dim = static_cast<int>(cal.transitions[0].action.size());

  // 90/10 split by a seeded permutation.
  std::vector<int> order(cal.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(HashSeed(seed, 0x5b117));
  std::shuffle(order.begin(), order.end(), split_rng);
  const int n_hold = std::max(
      1, static_cast<int>(std::round(config.holdout_fraction * cal.size())));
  CalibrationSet train;
  std::vector<Transition> holdout;
  for (int i = 0; i < cal.size(); ++i) {
    const Transition& t = cal.transitions[order[i]];
    if (i < n_hold) {
      holdout.push_back(t);
    } else {
      train.transitions.push_back(t);
    }
  }

  // Standardization statistics from the clean training split.
  std::mt19937_64 unused(0);
  const AugmentedSet clean =
      BuildAugmentedDataset(train, mask, sigma_profile, {0.0}, &unused);
  Normalization norm;
  ColumnStats(clean.inputs, &norm.in_mean, &norm.in_std);
  ColumnStats(clean.targets, &norm.out_mean, &norm.out_std);

  std::vector<int> dims;
  dims.push_back(static_cast<int>(clean.inputs.rows()));
  for (int h : config.hidden) dims.push_back(h);
  dims.push_back(static_cast<int>(clean.targets.rows()));

  ens.members.resize(config.members);
  ParallelFor(config.members, config.workers, [&](int k) {
    const uint64_t member_seed = HashSeed(seed, static_cast<uint64_t>(k));
    std::mt19937_64 noise_rng(HashSeed(member_seed, 1));
    AugmentedSet data = BuildAugmentedDataset(train, mask, sigma_profile,
                                              config.noise_levels, &noise_rng);
    data.inputs = ((data.inputs.colwise() - norm.in_mean).array().colwise() /
                   norm.in_std.array())
                      .matrix();
    data.targets = ((data.targets.colwise() - norm.out_mean).array().colwise() /
                    norm.out_std.array())
                       .matrix();
    Network net = MakeNetwork(dims, HashSeed(member_seed, 2));
    std::mt19937_64 shuffle_rng(HashSeed(member_seed, 3));
    Train(&net, data.inputs, data.targets, config.train, &shuffle_rng);
    net.norm = norm;
    ens.members[k] = std::move(net);
  });

  ens.r2_per_dim = R2PerDim(ens, holdout);
  for (size_t j = 0; j < mask.size(); ++j) {
    if (ens.r2_per_dim[j] > config.r2_threshold) {
      ens.reliable_dims.push_back(mask[j]);
    }
  }
  if (ens.reliable_dims.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "no dimension passes the R^2 threshold");
  }
  return ens;
}

Eigen::VectorXd EnsembleMean(const DynamicsEnsemble& ens,
                             const Eigen::VectorXd& obs_prev,
                             const Eigen::VectorXd& action_prev) {
  if (ens.members.empty()) {
    throw Error(ErrorCode::kConfiguration, "ensemble has no members");
  }
  const Eigen::VectorXd x = InputVector(ens, obs_prev, action_prev);
  Eigen::VectorXd sum = Predict(ens.members[0], x);
  for (size_t k = 1; k < ens.members.size(); ++k) {
    sum += Predict(ens.members[k], x);
  }
  return sum / static_cast<double>(ens.members.size());
}

double EpisScore(const DynamicsEnsemble& ens, const Eigen::VectorXd& obs_prev,
                 const Eigen::VectorXd& action_prev,
                 const Eigen::VectorXd& obs_cur) {
  if (ens.reliable_dims.empty()) {
    throw Error(ErrorCode::kConfiguration, "empty reliable dimension set");
  }
  const Eigen::VectorXd pred = EnsembleMean(ens, obs_prev, action_prev);
  double sum = 0.0;
  for (size_t i = 0; i < ens.reliable_dims.size(); ++i) {
    const int d = ens.reliable_dims[i];
    const auto it = std::find(ens.mask.begin(), ens.mask.end(), d);
    const int pos = static_cast<int>(it - ens.mask.begin());
    const double err = pred(pos) - (obs_cur(d) - obs_prev(d));
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(ens.reliable_dims.size()));
}

bool EpisTrigger(const DynamicsEnsemble& ens, const Eigen::VectorXd& obs_prev,
                 const Eigen::VectorXd& action_prev,
                 const Eigen::VectorXd& obs_cur) {
  if (!ens.tau_epis.has_value()) {
    throw Error(ErrorCode::kConfiguration, "epistemic threshold uncalibrated");
  }
  return EpisScore(ens, obs_prev, action_prev, obs_cur) > *ens.tau_epis;
}

double ThresholdFromScores(const std::vector<double>& scores, double m_e) {
  return NearestRankPercentile(scores, 95.0) * m_e;
}

std::vector<double> OfflineScores(const DynamicsEnsemble& ens,
                                  const CalibrationSet& cal) {
  std::vector<double> scores;
  scores.reserve(cal.size());
  for (const Transition& t : cal.transitions) {
    scores.push_back(EpisScore(ens, t.obs, t.action, t.next_obs));
  }
  return scores;
}

std::vector<double> R2PerDim(const DynamicsEnsemble& ens,
                             const std::vector<Transition>& transitions) {
  const int m = static_cast<int>(ens.mask.size());
  const int n = static_cast<int>(transitions.size());
  Eigen::MatrixXd y(m, n), p(m, n);
  for (int i = 0; i < n; ++i) {
    const Transition& t = transitions[i];
    y.col(i) = Gather(t.next_obs, ens.mask) - Gather(t.obs, ens.mask);
    p.col(i) = EnsembleMean(ens, t.obs, t.action);
  }
  std::vector<double> r2(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double mean = y.row(j).mean();
    const double ss_tot = (y.row(j).array() - mean).square().sum();
    const double ss_res = (y.row(j) - p.row(j)).squaredNorm();
    // A constant target carries no explainable variance.
    r2[j] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  }
  return r2;
}

nlohmann::json EnsembleToJson(const DynamicsEnsemble& ens) {
  nlohmann::json members = nlohmann::json::array();
  for (const Network& net : ens.members) members.push_back(NetworkToJson(net));
  nlohmann::json j = {{"members", members},
                      {"mask", ens.mask},
                      {"reliable_dims", ens.reliable_dims},
                      {"r2_per_dim", ens.r2_per_dim},
                      {"m_e", ens.m_e},
                      {"noise_sigma", ToStd(ens.noise_sigma)},
                      {"noise_levels", ens.noise_levels},
                      {"action_dim", ens.action_dim}};
  j["tau_epis"] = ens.tau_epis.has_value() ? nlohmann::json(*ens.tau_epis)
                                           : nlohmann::json(nullptr);
  return j;
}

DynamicsEnsemble EnsembleFromJson(const nlohmann::json& j) {
  DynamicsEnsemble ens;
  for (const nlohmann::json& m : j.at("members")) {
    ens.members.push_back(NetworkFromJson(m));
  }
  ens.mask = j.at("mask").get<std::vector<int>>();
  ens.reliable_dims = j.at("reliable_dims").get<std::vector<int>>();
  ens.r2_per_dim = j.at("r2_per_dim").get<std::vector<double>>();
  ens.m_e = j.at("m_e").get<double>();
  std::vector<double> sigma = j.at("noise_sigma").get<std::vector<double>>();
  ens.noise_sigma = Eigen::Map<Eigen::VectorXd>(sigma.data(), sigma.size());
  ens.noise_levels = j.at("noise_levels").get<std::vector<double>>();
  ens.action_dim = j.at("action_dim").get<int>();
  if (!j.at("tau_epis").is_null()) ens.tau_epis = j["tau_epis"].get<double>();
  ens.ReliablePositions();  // validates
  return ens;
}

}  // namespace udc
