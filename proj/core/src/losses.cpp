// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/losses.hpp"

#include <cmath>

#include "aldnorm/errors.hpp"

namespace aldnorm {

void LossWeights::validate() const {
  if (!(lambda >= 0.0) || !(beta >= 0.0)) throw ConfigError("loss weights: lambda and beta must be >= 0");
}

namespace {
template <typename T>
Tensor<T> batch_nll(std::span<const Tensor<T>> distributions, std::span<const int> targets, std::size_t* clamped,
                    const char* what) {
  if (distributions.size() != targets.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(distributions.size()) + " distributions for " +
                     std::to_string(targets.size()) + " targets");
  }
  if (distributions.empty()) throw ContractError(std::string(what) + ": empty batch");
  auto stacked = distributions.size() == 1 ? distributions[0] : concat(distributions, 0);
  return nll(stacked, targets, T(1e-12), clamped);
}
}  // namespace

template <typename T>
Tensor<T> task_loss(std::span<const Tensor<T>> distributions, std::span<const int> gold, std::size_t* clamped) {
  return batch_nll(distributions, gold, clamped, "task loss");
}

template <typename T>
Tensor<T> adv_loss(std::span<const Tensor<T>> distributions, std::span<const int> task_ids, std::size_t* clamped) {
  return batch_nll(distributions, task_ids, clamped, "adversarial loss");
}

template <typename T>
Tensor<T> diff_term(const Tensor<T>& private_features, const Tensor<T>& shared_features) {
  if (private_features.shape() != shared_features.shape()) {
    throw ShapeError("diff loss: private " + shape_str(private_features.shape()) + " vs shared " +
                     shape_str(shared_features.shape()));
  }
  return frobenius_sq(matmul(transpose(private_features), shared_features));
}

template <typename T>
Tensor<T> diff_loss(std::span<const Tensor<T>> private_features, std::span<const Tensor<T>> shared_features) {
  if (private_features.size() != shared_features.size() || private_features.empty()) {
    throw ShapeError("diff loss: batch sizes " + std::to_string(private_features.size()) + " and " +
                     std::to_string(shared_features.size()));
  }
  Tensor<T> total;
  for (std::size_t i = 0; i < private_features.size(); ++i) {
    auto term = diff_term(private_features[i], shared_features[i]);
    total = i == 0 ? term : add(total, term);
  }
  return scale(total, T(1) / static_cast<T>(private_features.size()));
}

template <typename T>
Tensor<T> total_loss(const Tensor<T>& task, const Tensor<T>& adv, const Tensor<T>& dif, const LossWeights& weights) {
  const std::pair<const char*, const Tensor<T>*> terms[] = {{"task", &task}, {"adversarial", &adv}, {"diff", &dif}};
  for (const auto& [name, t] : terms) {
    if (t->numel() != 1) throw ContractError(std::string("total loss: ") + name + " term is not a scalar");
    if (!std::isfinite(static_cast<double>(t->item()))) {
      throw DivergenceError(std::string("total loss: ") + name + " term is " + std::to_string(t->item()));
    }
  }
  auto out = add(add(task, scale(adv, static_cast<T>(weights.lambda))), scale(dif, static_cast<T>(weights.beta)));
  if (!std::isfinite(static_cast<double>(out.item()))) throw DivergenceError("total loss overflowed");
  return out;
}

#define ALDNORM_INSTANTIATE(T)                                                                                    \
  template Tensor<T> task_loss(std::span<const Tensor<T>>, std::span<const int>, std::size_t*);                   \
  template Tensor<T> adv_loss(std::span<const Tensor<T>>, std::span<const int>, std::size_t*);                    \
  template Tensor<T> diff_term(const Tensor<T>&, const Tensor<T>&);                                               \
  template Tensor<T> diff_loss(std::span<const Tensor<T>>, std::span<const Tensor<T>>);                           \
  template Tensor<T> total_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LossWeights&);
ALDNORM_INSTANTIATE(float)
ALDNORM_INSTANTIATE(double)
#undef ALDNORM_INSTANTIATE

}  // namespace aldnorm
