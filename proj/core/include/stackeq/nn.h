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

#ifndef STACKEQ_NN_H_
#define STACKEQ_NN_H_

#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace stackeq {

// Fully connected network, rectifier on hidden layers, identity output.
// Inputs and activations are column-major batches (one sample per column).
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: out x in
  std::vector<Eigen::VectorXd> biases;

  int InputDim() const { return static_cast<int>(weights.front().cols()); }
  int OutputDim() const { return static_cast<int>(weights.back().rows()); }
  int NumLayers() const { return static_cast<int>(weights.size()); }
};

// Glorot-uniform initialization over the given layer sizes
// (input, hidden..., output); at least one hidden layer required.
Mlp MakeMlp(const std::vector<int>& sizes, std::mt19937_64& rng);

struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
  std::vector<Eigen::MatrixXd> post;  // post-activation per layer
};

// cache may be null when no backward pass is needed.
Eigen::MatrixXd Forward(const Mlp& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Exact analytic gradients of the forward map; output_grad has one column
// of dLoss/dOutput per sample.
Gradients Backward(const Mlp& net, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad);

// Momentum SGD; velocity state lives in the optimizer, one per network.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum = 0.9)
      : lr_(lr), momentum_(momentum) {}
  void Step(Mlp& net, const Gradients& grads);
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  std::vector<Eigen::MatrixXd> vel_w_;
  std::vector<Eigen::VectorXd> vel_b_;
};

struct GumbelSample {
  Eigen::VectorXd relaxed;  // softmax((logits + gumbel) / temperature)
  int hard_index = 0;       // argmax of the perturbed logits
};

GumbelSample GumbelSoftmaxSample(const Eigen::VectorXd& logits,
                                 double temperature, std::mt19937_64& rng);

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);

// Fixed-capacity FIFO ring with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity 0");
  }

  void Push(T item) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(item));
    } else {
      data_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
    ++total_pushed_;
  }

  std::vector<T> Sample(size_t batch_size, std::mt19937_64& rng) const {
    if (data_.empty()) {
      throw std::logic_error("ReplayBuffer: sampling from empty buffer");
    }
    std::uniform_int_distribution<size_t> pick(0, data_.size() - 1);
    std::vector<T> batch;
    batch.reserve(batch_size);
    for (size_t i = 0; i < batch_size; ++i) batch.push_back(data_[pick(rng)]);
    return batch;
  }

  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  size_t total_pushed() const { return total_pushed_; }
  const T& At(size_t i) const { return data_[(head_ + i) % data_.size()]; }

 private:
  size_t capacity_;
  size_t head_ = 0;  // oldest element once full
  size_t total_pushed_ = 0;
  std::vector<T> data_;
};

// tau = 1 is a hard copy, tau = 0 leaves the target unchanged.
void SyncTarget(const Mlp& online, Mlp& target, double tau = 1.0);

nlohmann::json MlpToJson(const Mlp& net);
Mlp MlpFromJson(const nlohmann::json& j);

}  // namespace stackeq

#endif  // STACKEQ_NN_H_
