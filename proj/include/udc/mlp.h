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

// Dense feed-forward networks with tanh hidden layers, trained with Adam.

#ifndef UDC_MLP_H_
#define UDC_MLP_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace udc {

// Standardization statistics. Empty vectors mean identity.
struct Normalization {
  Eigen::VectorXd in_mean;
  Eigen::VectorXd in_std;
  Eigen::VectorXd out_mean;
  Eigen::VectorXd out_std;

  bool empty() const { return in_mean.size() == 0; }
};

struct Network {
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;
  Normalization norm;
  uint64_t seed = 0;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
};

// All parameters zero.
Network MakeZeroNetwork(const std::vector<int>& layer_dims);

// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Network MakeNetwork(const std::vector<int>& layer_dims, uint64_t seed);

// Raw forward pass; normalization is not applied.
Eigen::VectorXd Forward(const Network& net, const Eigen::VectorXd& input);

// Column-per-sample batch forward pass.
Eigen::MatrixXd ForwardBatch(const Network& net, const Eigen::MatrixXd& inputs);

// Forward pass in physical units: standardizes the input and de-standardizes
// the output using net.norm.
Eigen::VectorXd Predict(const Network& net, const Eigen::VectorXd& input);

double MseLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  int64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState MakeAdam(const Network& net, double learning_rate = 1e-3);

struct Gradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Mean squared error over every element of the batch and its gradient with
// respect to all parameters. Inputs and targets hold one sample per column.
double LossAndGradients(const Network& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, Gradients* grads);

// One Adam update. Returns the batch loss before the update.
double BackwardAndStep(Network* net, AdamState* adam,
                       const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 1e-3;
};

// Minibatch training on already standardized data. The sample order is
// reshuffled every epoch from `rng`. Returns per-epoch mean batch loss.
std::vector<double> Train(Network* net, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          const TrainConfig& config, std::mt19937_64* rng);

// Per-row mean and standard deviation of column samples. Standard deviations
// below 1e-12 are replaced by 1 so constant rows pass through unscaled.
void ColumnStats(const Eigen::MatrixXd& samples, Eigen::VectorXd* mean,
                 Eigen::VectorXd* std);

nlohmann::json NetworkToJson(const Network& net);
Network NetworkFromJson(const nlohmann::json& j);

}  // namespace udc

#endif  // UDC_MLP_H_
