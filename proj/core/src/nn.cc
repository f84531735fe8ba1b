// Copyright 2026 The stackeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stackeq/nn.h"

#include <cmath>

#include <nlohmann/json.hpp>

namespace stackeq {

Mlp MakeMlp(const std::vector<int>& sizes, std::mt19937_64& rng) {
  if (sizes.size() < 3) {
    throw std::invalid_argument("MakeMlp: need at least one hidden layer");
  }
  Mlp net;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] <= 0 || sizes[l + 1] <= 0) {
      throw std::invalid_argument("MakeMlp: non-positive layer size");
    }
    const double bound = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return net;
}

Eigen::MatrixXd Forward(const Mlp& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  if (x.rows() != net.InputDim()) {
    throw std::invalid_argument("Forward: input dimension mismatch");
  }
  if (cache != nullptr) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::MatrixXd h = x;
  const int L = net.NumLayers();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = net.weights[l] * h;
    z.colwise() += net.biases[l];
    Eigen::MatrixXd a = (l + 1 < L) ? z.cwiseMax(0.0) : z;
    if (cache != nullptr) {
      cache->pre.push_back(z);
      cache->post.push_back(a);
    }
    h = std::move(a);
  }
  return h;
}

Gradients Backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad) {
  const int L = net.NumLayers();
  if (output_grad.rows() != net.OutputDim() ||
      output_grad.cols() != cache.input.cols()) {
    throw std::invalid_argument("Backward: gradient shape mismatch");
  }
  Gradients grads;
  grads.weights.resize(L);
  grads.biases.resize(L);
  Eigen::MatrixXd delta = output_grad;
  for (int l = L - 1; l >= 0; --l) {
    if (l + 1 < L) {
      // Rectifier mask of this layer's pre-activation.
      delta = delta.cwiseProduct(
          (cache.pre[l].array() > 0.0).cast<double>().matrix());
    }
    const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.post[l - 1];
    grads.weights[l] = delta * below.transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = net.weights[l].transpose() * delta;
  }
  return grads;
}

void SgdOptimizer::Step(Mlp& net, const Gradients& grads) {
  if (vel_w_.empty()) {
    for (const auto& w : net.weights) {
      vel_w_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases) {
      vel_b_.push_back(Eigen::VectorXd::Zero(b.size()));
    }
  }
  for (size_t l = 0; l < net.weights.size(); ++l) {
    vel_w_[l] = momentum_ * vel_w_[l] - lr_ * grads.weights[l];
    vel_b_[l] = momentum_ * vel_b_[l] - lr_ * grads.biases[l];
    net.weights[l] += vel_w_[l];
    net.biases[l] += vel_b_[l];
  }
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  const Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

GumbelSample GumbelSoftmaxSample(const Eigen::VectorXd& logits,
                                 double temperature, std::mt19937_64& rng) {
  if (temperature <= 0) {
    throw std::invalid_argument("GumbelSoftmaxSample: temperature <= 0");
  }
  std::uniform_real_distribution<double> u(1e-300, 1.0);
  Eigen::VectorXd perturbed(logits.size());
  for (int i = 0; i < logits.size(); ++i) {
    perturbed[i] = logits[i] - std::log(-std::log(u(rng)));
  }
  GumbelSample sample;
  perturbed.maxCoeff(&sample.hard_index);
  sample.relaxed = Softmax(perturbed / temperature);
  return sample;
}

void SyncTarget(const Mlp& online, Mlp& target, double tau) {
  for (size_t l = 0; l < online.weights.size(); ++l) {
    target.weights[l] = tau * online.weights[l] + (1 - tau) * target.weights[l];
    target.biases[l] = tau * online.biases[l] + (1 - tau) * target.biases[l];
  }
}

nlohmann::json MlpToJson(const Mlp& net) {
  nlohmann::json j;
  nlohmann::json shapes = nlohmann::json::array();
  shapes.push_back(net.InputDim());
  for (const auto& w : net.weights) shapes.push_back(static_cast<int>(w.rows()));
  j["sizes"] = shapes;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    nlohmann::json wl = nlohmann::json::array();
    for (int i = 0; i < net.weights[l].rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < net.weights[l].cols(); ++k) {
        row.push_back(net.weights[l](i, k));
      }
      wl.push_back(row);
    }
    j["weights"].push_back(wl);
    nlohmann::json bl = nlohmann::json::array();
    for (int i = 0; i < net.biases[l].size(); ++i) {
      bl.push_back(net.biases[l][i]);
    }
    j["biases"].push_back(bl);
  }
  return j;
}

Mlp MlpFromJson(const nlohmann::json& j) {
  Mlp net;
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  for (size_t l = 0; l < weights.size(); ++l) {
    const int rows = static_cast<int>(weights[l].size());
    const int cols = static_cast<int>(weights[l][0].size());
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int k = 0; k < cols; ++k) w(i, k) = weights[l][i][k].get<double>();
    }
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) b[i] = biases[l][i].get<double>();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace stackeq
