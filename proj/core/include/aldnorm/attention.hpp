// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <string>
#include <vector>

#include "aldnorm/ops.hpp"
#include "aldnorm/optim.hpp"

namespace aldnorm {

// Additive masking: blocked scores get -1e9 before the softmax, which
// underflows to an exact zero weight.
struct AttentionMask {
  std::vector<bool> key_padding;  // true marks a PAD key; empty means none
  bool causal = false;            // query i may only see keys j <= i

  bool blocked(std::size_t query, std::size_t key) const {
    if (causal && key > query) return true;
    return !key_padding.empty() && key_padding[key];
  }
  bool empty() const { return key_padding.empty() && !causal; }
};

inline constexpr double kMaskedScore = -1e9;

template <typename T>
struct AttentionResult {
  Tensor<T> output;   // n_q x d_v
  Tensor<T> weights;  // n_q x n_k, rows sum to 1
};

/// softmax(Q K^T / sqrt(d_k) + mask) V.
/// Throws ContractError when some query row has every key masked.
template <typename T>
AttentionResult<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                        const AttentionMask& mask = {});

// Dropout settings and RNG threaded through a forward pass. `dropout` acts on
// the inputs of the recurrent heads, `sublayer_dropout` on Transformer
// sublayer outputs.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  double sublayer_dropout = 0.0;
  Rng* rng = nullptr;
};

template <typename T>
Tensor<T> apply_dropout(const Tensor<T>& x, ForwardContext& ctx) {
  if (!ctx.training || ctx.dropout <= 0.0 || ctx.rng == nullptr) return x;
  return dropout(x, ctx.dropout, *ctx.rng, true);
}

template <typename T>
Tensor<T> apply_sublayer_dropout(const Tensor<T>& x, ForwardContext& ctx) {
  if (!ctx.training || ctx.sublayer_dropout <= 0.0 || ctx.rng == nullptr) return x;
  return dropout(x, ctx.sublayer_dropout, *ctx.rng, true);
}

// h parallel heads with their own Q/K/V projections, concatenated in head
// order and mapped through W_o, b_o. Queries and keys/values may come from
// inputs of different widths (cross-attention).
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention(std::size_t query_width, std::size_t memory_width, std::size_t d_model,
                     std::size_t heads, Rng& rng);

  std::size_t heads() const noexcept { return heads_; }
  std::size_t d_model() const noexcept { return d_model_; }
  std::size_t d_k() const noexcept { return d_model_ / heads_; }

  // `weights_out`, when given, receives one n_q x n_k matrix per head.
  Tensor<T> forward(const Tensor<T>& queries, const Tensor<T>& memory, const AttentionMask& mask,
                    std::vector<Tensor<T>>* weights_out = nullptr) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;

  const Tensor<T>& wq(std::size_t h) const { return wq_.at(h); }
  const Tensor<T>& wk(std::size_t h) const { return wk_.at(h); }
  const Tensor<T>& wv(std::size_t h) const { return wv_.at(h); }
  const Tensor<T>& wo() const { return wo_; }
  const Tensor<T>& bo() const { return bo_; }

 private:
  std::size_t d_model_;
  std::size_t heads_;
  std::vector<Tensor<T>> wq_, wk_, wv_;
  Tensor<T> wo_, bo_;
};

}  // namespace aldnorm
