// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aldnorm/attention.hpp"
#include "aldnorm/layers.hpp"

namespace aldnorm {

enum class EncoderRole { shared, ald_private, tn_private };

std::string_view role_name(EncoderRole role);
std::optional<EncoderRole> parse_role(std::string_view name);

// Attention weights captured during one forward pass: [layer][head] holds an
// n x n row-major matrix.
struct AttentionRecord {
  std::size_t length = 0;
  std::vector<std::vector<std::vector<double>>> weights;
};

struct EncoderConfig {
  std::size_t d_in = 0;
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ffn_multiplier = 4;
  std::size_t max_len = 64;
};

// Post-norm Transformer layer: attention + residual + norm, then relu
// feed-forward + residual + norm.
template <typename T>
class EncoderLayer {
 public:
  EncoderLayer(std::size_t d_model, std::size_t heads, std::size_t ffn_hidden, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, const AttentionMask& mask, ForwardContext& ctx,
                    std::vector<Tensor<T>>* weights) const;
  void collect(ParameterList<T>& out, const std::string& prefix) const;

  const MultiHeadAttention<T>& attention() const noexcept { return attention_; }

 private:
  MultiHeadAttention<T> attention_;
  LayerNorm<T> norm1_;
  FeedForward<T> ffn_;
  LayerNorm<T> norm2_;
};

template <typename T>
class EncoderStack {
 public:
  EncoderStack(EncoderRole role, const EncoderConfig& config, Rng& rng);

  EncoderRole role() const noexcept { return role_; }
  const EncoderConfig& config() const noexcept { return config_; }
  const std::vector<EncoderLayer<T>>& layers() const noexcept { return layers_; }

  // x is n x d_in; returns n x d_model. Fills `record` when given.
  Tensor<T> encode(const Tensor<T>& x, const AttentionMask& mask, ForwardContext& ctx,
                   AttentionRecord* record = nullptr) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  EncoderRole role_;
  EncoderConfig config_;
  Linear<T> input_projection_;
  std::vector<EncoderLayer<T>> layers_;
};

// Text dump of attention records, one block per (role, layer, head):
//
//   attention<TAB>role<TAB>layer<TAB>head<TAB>n
//   tokens<TAB>t1<TAB>...<TAB>tn
//   n lines of n TAB-separated weights (row i = query token i)
struct AttentionDumpEntry {
  std::string role;
  std::size_t layer = 0;
  std::size_t head = 0;
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> matrix;
};

void write_attention_dump(std::ostream& out, std::string_view role, const std::vector<std::string>& tokens,
                          const AttentionRecord& record);
std::vector<AttentionDumpEntry> read_attention_dump(std::istream& in);

}  // namespace aldnorm
