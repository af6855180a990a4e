// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/lstm.hpp"

namespace aldnorm {

template <typename T>
LstmWeights<T>::LstmWeights(std::size_t in, std::size_t hidden, Rng& rng)
    : w_x(make_weight<T>(in, 4 * hidden, rng)),
      w_h(make_weight<T>(hidden, 4 * hidden, rng)),
      bias(make_constant<T>({4 * hidden}, T(0))) {}

template <typename T>
void LstmWeights<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + "w_x", w_x});
  out.push_back({prefix + "w_h", w_h});
  out.push_back({prefix + "bias", bias});
}

template <typename T>
BiLstm<T>::BiLstm(std::size_t input, std::size_t hidden, std::size_t layers, Rng& rng) : hidden_(hidden) {
  if (hidden == 0 || layers == 0) throw ConfigError("bilstm: hidden width and layer count must be positive");
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? input : 2 * hidden;
    forward_.emplace_back(in, hidden, rng);
    backward_.emplace_back(in, hidden, rng);
  }
}

template <typename T>
BiLstmOutput<T> BiLstm<T>::forward(const Tensor<T>& x, ForwardContext& ctx, const std::vector<bool>& padding) const {
  if (!padding.empty() && padding.size() != x.rows()) {
    throw ShapeError("bilstm: padding mask of " + std::to_string(padding.size()) + " for " +
                     std::to_string(x.rows()) + " rows");
  }
  std::vector<Tensor<T>> rows;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    if (padding.empty() || !padding[t]) rows.push_back(slice_rows(x, t, t + 1));
  }
  if (rows.empty()) throw ContractError("bilstm: sequence has no unpadded positions");

  const std::size_t n = rows.size();
  Tensor<T> final_fwd, final_bwd, sequence;
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    if (l > 0) {
      for (auto& r : rows) r = apply_dropout(r, ctx);
    }
    std::vector<Tensor<T>> h_fwd(n), h_bwd(n);
    auto state = Tensor<T>::zeros({2, hidden_});
    const auto& f = forward_[l];
    for (std::size_t t = 0; t < n; ++t) {
      state = lstm_cell(rows[t], state, f.w_x, f.w_h, f.bias);
      h_fwd[t] = slice_rows(state, 0, 1);
    }
    state = Tensor<T>::zeros({2, hidden_});
    const auto& b = backward_[l];
    for (std::size_t t = n; t-- > 0;) {
      state = lstm_cell(rows[t], state, b.w_x, b.w_h, b.bias);
      h_bwd[t] = slice_rows(state, 0, 1);
    }
    final_fwd = h_fwd[n - 1];
    final_bwd = h_bwd[0];
    for (std::size_t t = 0; t < n; ++t) rows[t] = concat({h_fwd[t], h_bwd[t]}, 1);
  }
  sequence = concat<T>(std::span<const Tensor<T>>(rows), 0);
  return {sequence, concat({final_fwd, final_bwd}, 1)};
}

template <typename T>
void BiLstm<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    forward_[l].collect(out, prefix + "layer" + std::to_string(l) + ".fwd.");
    backward_[l].collect(out, prefix + "layer" + std::to_string(l) + ".bwd.");
  }
}

template struct LstmWeights<float>;
template struct LstmWeights<double>;
template class BiLstm<float>;
template class BiLstm<double>;

}  // namespace aldnorm
