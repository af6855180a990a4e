// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/attention.hpp"

#include <cmath>

namespace aldnorm {

template <typename T>
AttentionResult<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                        const AttentionMask& mask) {
  if (q.cols() != k.cols()) {
    throw ShapeError("attention: query width " + shape_str(q.shape()) + " differs from key width " +
                     shape_str(k.shape()));
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("attention: " + shape_str(k.shape()) + " keys vs " + shape_str(v.shape()) + " values");
  }
  const std::size_t nq = q.rows(), nk = k.rows();
  if (!mask.key_padding.empty() && mask.key_padding.size() != nk) {
    throw ShapeError("attention: padding mask of " + std::to_string(mask.key_padding.size()) + " for " +
                     std::to_string(nk) + " keys");
  }
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(q.cols()));
  auto scores = scale(matmul(q, transpose(k)), inv_sqrt);
  if (!mask.empty()) {
    std::vector<T> additive(nq * nk, T(0));
    for (std::size_t i = 0; i < nq; ++i) {
      bool any_open = false;
      for (std::size_t j = 0; j < nk; ++j) {
        if (mask.blocked(i, j)) {
          additive[i * nk + j] = static_cast<T>(kMaskedScore);
        } else {
          any_open = true;
        }
      }
      if (!any_open) throw ContractError("attention: query row " + std::to_string(i) + " has every key masked");
    }
    scores = add(scores, Tensor<T>::from({nq, nk}, std::move(additive)));
  }
  auto weights = softmax(scores, 1);
  return {matmul(weights, v), weights};
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(std::size_t query_width, std::size_t memory_width, std::size_t d_model,
                                          std::size_t heads, Rng& rng)
    : d_model_(d_model), heads_(heads) {
  if (heads == 0 || d_model % heads != 0) {
    throw ConfigError("multi-head attention: d_model " + std::to_string(d_model) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  const std::size_t dk = d_model / heads;
  for (std::size_t h = 0; h < heads; ++h) {
    wq_.push_back(make_weight<T>(query_width, dk, rng));
    wk_.push_back(make_weight<T>(memory_width, dk, rng));
    wv_.push_back(make_weight<T>(memory_width, dk, rng));
  }
  wo_ = make_weight<T>(d_model, d_model, rng);
  bo_ = make_constant<T>({d_model}, T(0));
}

template <typename T>
Tensor<T> MultiHeadAttention<T>::forward(const Tensor<T>& queries, const Tensor<T>& memory,
                                         const AttentionMask& mask, std::vector<Tensor<T>>* weights_out) const {
  std::vector<Tensor<T>> heads;
  heads.reserve(heads_);
  if (weights_out) weights_out->clear();
  for (std::size_t h = 0; h < heads_; ++h) {
    auto r = scaled_dot_attention(matmul(queries, wq_[h]), matmul(memory, wk_[h]), matmul(memory, wv_[h]), mask);
    heads.push_back(r.output);
    if (weights_out) weights_out->push_back(r.weights);
  }
  auto joined = heads_ == 1 ? heads[0] : concat<T>(std::span<const Tensor<T>>(heads), 1);
  return add_bias(matmul(joined, wo_), bo_);
}

template <typename T>
void MultiHeadAttention<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::string hp = prefix + "h" + std::to_string(h) + ".";
    out.push_back({hp + "wq", wq_[h]});
    out.push_back({hp + "wk", wk_[h]});
    out.push_back({hp + "wv", wv_[h]});
  }
  out.push_back({prefix + "wo", wo_});
  out.push_back({prefix + "bo", bo_});
}

template AttentionResult<float> scaled_dot_attention(const Tensor<float>&, const Tensor<float>&,
                                                     const Tensor<float>&, const AttentionMask&);
template AttentionResult<double> scaled_dot_attention(const Tensor<double>&, const Tensor<double>&,
                                                      const Tensor<double>&, const AttentionMask&);
template class MultiHeadAttention<float>;
template class MultiHeadAttention<double>;

}  // namespace aldnorm
