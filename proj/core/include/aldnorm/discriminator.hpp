// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <string>

#include "aldnorm/layers.hpp"
#include "aldnorm/lstm.hpp"

namespace aldnorm {

enum class TaskId : int { ald = 0, tn = 1 };

// Predicts which task a sentence came from using the shared features only.
template <typename T>
class TaskDiscriminator {
 public:
  TaskDiscriminator(std::size_t d_model, std::size_t hidden, std::size_t layers, Rng& rng);

  // 1 x 2 distribution over {ald, tn}. With `reverse`, the input first passes
  // through grad_reverse so the shared encoder ascends the loss.
  Tensor<T> discriminate(const Tensor<T>& shared, const AttentionMask& mask, bool reverse, ForwardContext& ctx) const;
  Tensor<T> logits(const Tensor<T>& shared, const AttentionMask& mask, bool reverse, ForwardContext& ctx) const;

  Linear<T>& projection() noexcept { return projection_; }
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  BiLstm<T> lstm_;
  Linear<T> projection_;
};

}  // namespace aldnorm
