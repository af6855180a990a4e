// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <string>

#include "aldnorm/ops.hpp"
#include "aldnorm/optim.hpp"

namespace aldnorm {

template <typename T>
struct Linear {
  Tensor<T> weight;  // in x out
  Tensor<T> bias;    // out

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng)
      : weight(make_weight<T>(in, out, rng)), bias(make_constant<T>({out}, T(0))) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return add_bias(matmul(x, weight), bias); }

  void collect(ParameterList<T>& out, const std::string& prefix) const {
    out.push_back({prefix + "weight", weight});
    out.push_back({prefix + "bias", bias});
  }
};

template <typename T>
struct LayerNorm {
  Tensor<T> gain;
  Tensor<T> bias;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t width)
      : gain(make_constant<T>({width}, T(1))), bias(make_constant<T>({width}, T(0))) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return layer_norm(x, gain, bias); }

  void collect(ParameterList<T>& out, const std::string& prefix) const {
    out.push_back({prefix + "gain", gain});
    out.push_back({prefix + "bias", bias});
  }
};

// Position-wise relu MLP.
template <typename T>
struct FeedForward {
  Linear<T> inner;
  Linear<T> outer;

  FeedForward() = default;
  FeedForward(std::size_t width, std::size_t hidden, Rng& rng) : inner(width, hidden, rng), outer(hidden, width, rng) {}

  Tensor<T> operator()(const Tensor<T>& x) const { return outer(relu(inner(x))); }

  void collect(ParameterList<T>& out, const std::string& prefix) const {
    inner.collect(out, prefix + "inner.");
    outer.collect(out, prefix + "outer.");
  }
};

}  // namespace aldnorm
