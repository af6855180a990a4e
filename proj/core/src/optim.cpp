// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/optim.hpp"

#include <cmath>

namespace aldnorm {

template <typename T>
Tensor<T> make_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<T> values(fan_in * fan_out);
  for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
  return Tensor<T>::from({fan_in, fan_out}, std::move(values), true);
}

template <typename T>
Tensor<T> make_constant(Shape shape, T value) {
  return Tensor<T>::full(std::move(shape), value, true);
}

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamConfig& config) {
  if (param.size() != grad.size()) {
    throw ShapeError("adam_step: " + std::to_string(param.size()) + " parameters vs " +
                     std::to_string(grad.size()) + " gradients");
  }
  if (state.m.empty() && state.v.empty() && state.t == 0) {
    state.m.assign(param.size(), T(0));
    state.v.assign(param.size(), T(0));
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ShapeError("adam_step: optimizer state does not match parameter of size " +
                     std::to_string(param.size()));
  }
  state.t += 1;
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(config.beta1, static_cast<double>(state.t)));
  const T c2 = static_cast<T>(1.0 - std::pow(config.beta2, static_cast<double>(state.t)));
  const T lr = static_cast<T>(config.learning_rate);
  const T eps = static_cast<T>(config.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const T m_hat = state.m[i] / c1;
    const T v_hat = state.v[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template <typename T>
void Adam<T>::step(const ParameterList<T>& params) {
  for (const auto& p : params) {
    Tensor<T> t = p.tensor;
    if (!t.has_grad()) t.zero_grad();
    adam_step<T>(t.mutable_values(), t.grad(), states_[p.name], config_);
  }
}

template <typename T>
double clip_grad_norm(const ParameterList<T>& params, double max_norm) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (T g : p.tensor.grad()) total += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const T factor = static_cast<T>(max_norm / norm);
    for (const auto& p : params) {
      if (!p.tensor.has_grad()) continue;
      Tensor<T> t = p.tensor;
      for (T& g : t.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

template <typename T>
void zero_grads(const ParameterList<T>& params) {
  for (const auto& p : params) {
    Tensor<T> t = p.tensor;
    t.zero_grad();
  }
}

#define ALDNORM_INSTANTIATE_OPTIM(T)                                                           \
  template Tensor<T> make_weight<T>(std::size_t, std::size_t, Rng&);                          \
  template Tensor<T> make_constant<T>(Shape, T);                                              \
  template void adam_step<T>(std::span<T>, std::span<const T>, AdamState<T>&, const AdamConfig&); \
  template class Adam<T>;                                                                      \
  template double clip_grad_norm<T>(const ParameterList<T>&, double);                         \
  template void zero_grads<T>(const ParameterList<T>&);

ALDNORM_INSTANTIATE_OPTIM(float)
ALDNORM_INSTANTIATE_OPTIM(double)

#undef ALDNORM_INSTANTIATE_OPTIM

}  // namespace aldnorm
