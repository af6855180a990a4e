// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <span>
#include <string>
#include <vector>

#include "aldnorm/encoder.hpp"
#include "aldnorm/lstm.hpp"

namespace aldnorm {

// Aggressive-language head: BiLSTM over [shared; private] token features,
// final forward and backward states pooled, affine map to label logits.
template <typename T>
class ClassifierHead {
 public:
  ClassifierHead(std::size_t d_model, std::size_t hidden, std::size_t num_labels, Rng& rng);

  std::size_t num_labels() const noexcept { return num_labels_; }

  // Returns a 1 x |labels| probability row.
  Tensor<T> classify(const Tensor<T>& shared, const Tensor<T>& private_features, const AttentionMask& mask,
                     ForwardContext& ctx) const;
  Tensor<T> logits(const Tensor<T>& shared, const Tensor<T>& private_features, const AttentionMask& mask,
                   ForwardContext& ctx) const;

  Linear<T>& projection() noexcept { return projection_; }
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  std::size_t num_labels_;
  BiLstm<T> lstm_;
  Linear<T> projection_;
};

template <typename T>
class DecoderLayer {
 public:
  DecoderLayer(std::size_t d_model, std::size_t memory_width, std::size_t heads, std::size_t ffn_hidden, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& memory, const AttentionMask& memory_mask,
                    ForwardContext& ctx) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  MultiHeadAttention<T> self_attention_;
  LayerNorm<T> norm1_;
  MultiHeadAttention<T> cross_attention_;
  LayerNorm<T> norm2_;
  FeedForward<T> ffn_;
  LayerNorm<T> norm3_;
};

struct DecodeStep {
  int token = 0;
  std::vector<double> distribution;
};

struct DecodeResult {
  std::vector<int> tokens;  // excludes BOS and EOS
  bool truncated = false;   // max_len reached before EOS
  std::vector<DecodeStep> trace;
};

struct DecoderConfig {
  std::size_t d_model = 64;
  std::size_t memory_width = 128;
  std::size_t heads = 4;
  std::size_t layers = 3;
  std::size_t ffn_multiplier = 4;
  std::size_t target_vocab = 0;
  std::size_t max_len = 64;
};

// Text normalizer: Transformer decoder with causal self-attention and
// cross-attention over the [shared; private] encoder memory.
template <typename T>
class NormalizerDecoder {
 public:
  NormalizerDecoder(const DecoderConfig& config, Rng& rng);

  const DecoderConfig& config() const noexcept { return config_; }

  // input_ids starts with BOS; returns len(input_ids) x V_t logits where row j
  // predicts the token after position j.
  Tensor<T> logits(const Tensor<T>& memory, const AttentionMask& memory_mask, std::span<const int> input_ids,
                   ForwardContext& ctx) const;

  // Teacher-forced mean per-position cross-entropy for gold (without
  // BOS/EOS), predicting gold followed by EOS.
  Tensor<T> loss(const Tensor<T>& memory, const AttentionMask& memory_mask, std::span<const int> gold,
                 ForwardContext& ctx) const;

  DecodeResult decode(const Tensor<T>& memory, const AttentionMask& memory_mask, std::size_t max_len,
                      bool keep_trace = false) const;

  Linear<T>& projection() noexcept { return projection_; }
  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  DecoderConfig config_;
  Tensor<T> target_table_;
  Tensor<T> position_table_;
  std::vector<DecoderLayer<T>> layers_;
  Linear<T> projection_;
};

}  // namespace aldnorm
