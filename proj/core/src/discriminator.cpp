// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/discriminator.hpp"

namespace aldnorm {

template <typename T>
TaskDiscriminator<T>::TaskDiscriminator(std::size_t d_model, std::size_t hidden, std::size_t layers, Rng& rng)
    : lstm_(d_model, hidden, layers, rng), projection_(2 * hidden, 2, rng) {}

template <typename T>
Tensor<T> TaskDiscriminator<T>::logits(const Tensor<T>& shared, const AttentionMask& mask, bool reverse,
                                       ForwardContext& ctx) const {
  auto input = reverse ? grad_reverse(shared) : shared;
  auto out = lstm_.forward(input, ctx, mask.key_padding);
  return projection_(apply_dropout(out.pooled, ctx));
}

template <typename T>
Tensor<T> TaskDiscriminator<T>::discriminate(const Tensor<T>& shared, const AttentionMask& mask, bool reverse,
                                             ForwardContext& ctx) const {
  return softmax(logits(shared, mask, reverse, ctx), 1);
}

template <typename T>
void TaskDiscriminator<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  lstm_.collect(out, prefix + "lstm.");
  projection_.collect(out, prefix + "out.");
}

template class TaskDiscriminator<float>;
template class TaskDiscriminator<double>;

}  // namespace aldnorm
