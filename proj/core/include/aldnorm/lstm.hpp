// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <string>
#include <vector>

#include "aldnorm/attention.hpp"

namespace aldnorm {

template <typename T>
struct LstmWeights {
  Tensor<T> w_x;   // in x 4H
  Tensor<T> w_h;   // H x 4H
  Tensor<T> bias;  // 4H

  LstmWeights() = default;
  LstmWeights(std::size_t in, std::size_t hidden, Rng& rng);
  void collect(ParameterList<T>& out, const std::string& prefix) const;
};

template <typename T>
struct BiLstmOutput {
  Tensor<T> sequence;  // n x 2H, [forward; backward] per position
  Tensor<T> pooled;    // 1 x 2H, final forward state ++ final backward state
};

// Stacked bidirectional LSTM; layer l > 0 reads the 2H outputs of layer l-1.
template <typename T>
class BiLstm {
 public:
  BiLstm(std::size_t input, std::size_t hidden, std::size_t layers, Rng& rng);

  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t layers() const noexcept { return forward_.size(); }

  // Rows flagged in `padding` are skipped entirely.
  BiLstmOutput<T> forward(const Tensor<T>& x, ForwardContext& ctx, const std::vector<bool>& padding = {}) const;

  void collect(ParameterList<T>& out, const std::string& prefix) const;

 private:
  std::size_t hidden_;
  std::vector<LstmWeights<T>> forward_;
  std::vector<LstmWeights<T>> backward_;
};

}  // namespace aldnorm
