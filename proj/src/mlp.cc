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

#include "udc/mlp.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "udc/error.h"

namespace udc {

namespace {

void CheckDims(const std::vector<int>& dims) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "network needs at least two layers");
  }
  for (int d : dims) {
    if (d <= 0) throw Error(ErrorCode::kInvalidInput, "layer dim must be > 0");
  }
}

nlohmann::json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const nlohmann::json& j) {
  std::vector<double> values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

}  // namespace

Network MakeZeroNetwork(const std::vector<int>& layer_dims) {
  CheckDims(layer_dims);
  Network net;
  net.layer_dims = layer_dims;
  for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    net.weights.push_back(
        Eigen::MatrixXd::Zero(layer_dims[l + 1], layer_dims[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(layer_dims[l + 1]));
  }
  return net;
}

Network MakeNetwork(const std::vector<int>& layer_dims, uint64_t seed) {
  Network net = MakeZeroNetwork(layer_dims);
  net.seed = seed;
  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer_dims[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd& w = net.weights[l];
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
    for (int r = 0; r < net.biases[l].size(); ++r) net.biases[l](r) = u(rng);
  }
  return net;
}

Eigen::VectorXd Forward(const Network& net, const Eigen::VectorXd& input) {
  if (input.size() != net.input_dim()) {
    throw Error(ErrorCode::kInvalidInput,
                "input length " + std::to_string(input.size()) +
                    " does not match layer_dims[0] = " +
                    std::to_string(net.input_dim()));
  }
  Eigen::VectorXd h = input;
  for (int l = 0; l < net.num_layers(); ++l) {
    Eigen::VectorXd z = net.weights[l] * h + net.biases[l];
    h = (l + 1 < net.num_layers()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return h;
}

Eigen::MatrixXd ForwardBatch(const Network& net,
                             const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw Error(ErrorCode::kInvalidInput, "batch input rows mismatch");
  }
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l < net.num_layers(); ++l) {
    Eigen::MatrixXd z = net.weights[l] * h;
    z.colwise() += net.biases[l];
    h = (l + 1 < net.num_layers()) ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return h;
}

Eigen::VectorXd Predict(const Network& net, const Eigen::VectorXd& input) {
  if (net.norm.empty()) return Forward(net, input);
  if (input.size() != net.input_dim()) {
    throw Error(ErrorCode::kInvalidInput, "predict input length mismatch");
  }
  const Eigen::VectorXd x =
      ((input - net.norm.in_mean).array() / net.norm.in_std.array()).matrix();
  const Eigen::VectorXd y = Forward(net, x);
  return (y.array() * net.norm.out_std.array()).matrix() + net.norm.out_mean;
}

double MseLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) {
    throw Error(ErrorCode::kInvalidInput, "mse length mismatch");
  }
  if (pred.size() == 0) return 0.0;
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

AdamState MakeAdam(const Network& net, double learning_rate) {
  AdamState adam;
  adam.learning_rate = learning_rate;
  for (int l = 0; l < net.num_layers(); ++l) {
    adam.m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                             net.weights[l].cols()));
    adam.v_w.push_back(adam.m_w.back());
    adam.m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    adam.v_b.push_back(adam.m_b.back());
  }
  return adam;
}

double LossAndGradients(const Network& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, Gradients* grads) {
  const int layers = net.num_layers();
  if (inputs.cols() == 0 || inputs.cols() != targets.cols() ||
      inputs.rows() != net.input_dim() || targets.rows() != net.output_dim()) {
    throw Error(ErrorCode::kInvalidInput, "inconsistent batch shapes");
  }
  // Keep every layer's activation for the backward pass.
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  acts[0] = inputs;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = net.weights[l] * acts[l];
    z.colwise() += net.biases[l];
    acts[l + 1] = (l + 1 < layers) ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  const Eigen::MatrixXd diff = acts[layers] - targets;
  const double count = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / count;

  grads->w.resize(layers);
  grads->b.resize(layers);
  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (int l = layers - 1; l >= 0; --l) {
    grads->w[l].noalias() = delta * acts[l].transpose();
    grads->b[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = net.weights[l].transpose() * delta;
      delta = (back.array() * (1.0 - acts[l].array().square())).matrix();
    }
  }
  return loss;
}

double BackwardAndStep(Network* net, AdamState* adam,
                       const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets) {
  Gradients g;
  const double loss = LossAndGradients(*net, inputs, targets, &g);
  bool finite = std::isfinite(loss);
  for (int l = 0; finite && l < net->num_layers(); ++l) {
    finite = g.w[l].allFinite() && g.b[l].allFinite();
  }
  if (!finite) {
    throw Error(ErrorCode::kTrainingDivergence,
                "non-finite loss or gradient at Adam step " +
                    std::to_string(adam->step_count + 1));
  }
  adam->step_count += 1;
  const double t = static_cast<double>(adam->step_count);
  const double c1 = 1.0 - std::pow(adam->beta1, t);
  const double c2 = 1.0 - std::pow(adam->beta2, t);
  const double lr = adam->learning_rate;
  const double b1 = adam->beta1, b2 = adam->beta2, eps = adam->epsilon;
  for (int l = 0; l < net->num_layers(); ++l) {
    adam->m_w[l] = b1 * adam->m_w[l] + (1.0 - b1) * g.w[l];
    adam->v_w[l] = b2 * adam->v_w[l] + (1.0 - b2) * g.w[l].cwiseAbs2();
    adam->m_b[l] = b1 * adam->m_b[l] + (1.0 - b1) * g.b[l];
    adam->v_b[l] = b2 * adam->v_b[l] + (1.0 - b2) * g.b[l].cwiseAbs2();
    net->weights[l].array() -=
        lr * (adam->m_w[l].array() / c1) /
        ((adam->v_w[l].array() / c2).sqrt() + eps);
    net->biases[l].array() -=
        lr * (adam->m_b[l].array() / c1) /
        ((adam->v_b[l].array() / c2).sqrt() + eps);
  }
  return loss;
}

std::vector<double> Train(Network* net, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& targets,
                          const TrainConfig& config, std::mt19937_64* rng) {
  const int n = static_cast<int>(inputs.cols());
  if (n == 0 || targets.cols() != n) {
    throw Error(ErrorCode::kInvalidInput, "empty or mismatched training set");
  }
  if (config.batch_size <= 0 || config.epochs < 0) {
    throw Error(ErrorCode::kInvalidInput, "bad training configuration");
  }
  AdamState adam = MakeAdam(*net, config.learning_rate);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  history.reserve(config.epochs);
  Eigen::MatrixXd xb, yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with an explicit draw so the order only depends on rng.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>((*rng)() % static_cast<uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    double total = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      xb.resize(inputs.rows(), count);
      yb.resize(targets.rows(), count);
      for (int k = 0; k < count; ++k) {
        xb.col(k) = inputs.col(order[start + k]);
        yb.col(k) = targets.col(order[start + k]);
      }
      total += BackwardAndStep(net, &adam, xb, yb);
      ++batches;
    }
    history.push_back(total / batches);
  }
  return history;
}

void ColumnStats(const Eigen::MatrixXd& samples, Eigen::VectorXd* mean,
                 Eigen::VectorXd* std) {
  const double n = static_cast<double>(samples.cols());
  if (samples.cols() == 0) {
    throw Error(ErrorCode::kInvalidInput, "statistics of empty sample");
  }
  *mean = samples.rowwise().sum() / n;
  Eigen::MatrixXd centered = samples.colwise() - *mean;
  *std = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
  for (int i = 0; i < std->size(); ++i) {
    if (!((*std)(i) > 1e-12)) (*std)(i) = 1.0;
  }
}

nlohmann::json NetworkToJson(const Network& net) {
  nlohmann::json j;
  j["layer_dims"] = net.layer_dims;
  j["activation"] = "tanh";
  j["seed"] = net.seed;
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.num_layers(); ++l) {
    const Eigen::MatrixXd& w = net.weights[l];
    std::vector<double> flat;
    flat.reserve(w.size());
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    layers.push_back({{"weights", flat}, {"bias", VectorToJson(net.biases[l])}});
  }
  j["layers"] = layers;
  if (!net.norm.empty()) {
    j["normalization"] = {{"in_mean", VectorToJson(net.norm.in_mean)},
                          {"in_std", VectorToJson(net.norm.in_std)},
                          {"out_mean", VectorToJson(net.norm.out_mean)},
                          {"out_std", VectorToJson(net.norm.out_std)}};
  }
  return j;
}

Network NetworkFromJson(const nlohmann::json& j) {
  Network net = MakeZeroNetwork(j.at("layer_dims").get<std::vector<int>>());
  net.seed = j.value("seed", uint64_t{0});
  const nlohmann::json& layers = j.at("layers");
  if (static_cast<int>(layers.size()) != net.num_layers()) {
    throw Error(ErrorCode::kInvalidInput, "layer count mismatch in json");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    std::vector<double> flat = layers[l].at("weights").get<std::vector<double>>();
    Eigen::MatrixXd& w = net.weights[l];
    if (static_cast<Eigen::Index>(flat.size()) != w.size()) {
      throw Error(ErrorCode::kInvalidInput, "weight array size mismatch");
    }
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = flat[r * w.cols() + c];
    }
    net.biases[l] = VectorFromJson(layers[l].at("bias"));
    if (net.biases[l].size() != w.rows()) {
      throw Error(ErrorCode::kInvalidInput, "bias size mismatch");
    }
  }
  if (j.contains("normalization")) {
    const nlohmann::json& n = j["normalization"];
    net.norm.in_mean = VectorFromJson(n.at("in_mean"));
    net.norm.in_std = VectorFromJson(n.at("in_std"));
    net.norm.out_mean = VectorFromJson(n.at("out_mean"));
    net.norm.out_std = VectorFromJson(n.at("out_std"));
  }
  return net;
}

}  // namespace udc
