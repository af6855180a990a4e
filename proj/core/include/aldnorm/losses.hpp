// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <span>

#include "aldnorm/ops.hpp"

namespace aldnorm {

struct LossWeights {
  double lambda = 0.05;  // adversarial term
  double beta = 0.01;    // orthogonality term

  void validate() const;
};

// -sum log p(gold) over a batch of 1 x K distributions. Gold probabilities
// below 1e-12 are clamped; `clamped` counts them.
template <typename T>
Tensor<T> task_loss(std::span<const Tensor<T>> distributions, std::span<const int> gold,
                    std::size_t* clamped = nullptr);

// Cross-entropy of discriminator outputs against the true task ids.
template <typename T>
Tensor<T> adv_loss(std::span<const Tensor<T>> distributions, std::span<const int> task_ids,
                   std::size_t* clamped = nullptr);

// ||private^T shared||_F^2 for one sentence.
template <typename T>
Tensor<T> diff_term(const Tensor<T>& private_features, const Tensor<T>& shared_features);

// Mean of diff_term over the sentences of a batch.
template <typename T>
Tensor<T> diff_loss(std::span<const Tensor<T>> private_features, std::span<const Tensor<T>> shared_features);

// task + lambda * adv + beta * dif. Throws DivergenceError naming the
// offending term when any input is NaN or infinite.
template <typename T>
Tensor<T> total_loss(const Tensor<T>& task, const Tensor<T>& adv, const Tensor<T>& dif, const LossWeights& weights);

}  // namespace aldnorm
