// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aldnorm/random.hpp"
#include "aldnorm/tensor.hpp"

namespace aldnorm {

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
using ParameterList = std::vector<NamedParameter<T>>;

// Creates a trainable leaf. Weight matrices get Xavier-uniform values, bias
// vectors and gains are filled with a constant.
template <typename T>
Tensor<T> make_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng);

template <typename T>
Tensor<T> make_constant(Shape shape, T value);

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments for one parameter. Each parameter keeps its own step counter so a
// parameter that sits out a turn is neither moved nor aged.
template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t t = 0;
};

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamConfig& config);

template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  // Updates every listed parameter from its accumulated gradient.
  void step(const ParameterList<T>& params);

  std::map<std::string, AdamState<T>>& states() noexcept { return states_; }
  const std::map<std::string, AdamState<T>>& states() const noexcept { return states_; }

 private:
  AdamConfig config_;
  std::map<std::string, AdamState<T>> states_;
};

// Rescales gradients in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(const ParameterList<T>& params, double max_norm);

template <typename T>
void zero_grads(const ParameterList<T>& params);

}  // namespace aldnorm
