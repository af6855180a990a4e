// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aldnorm/random.hpp"
#include "aldnorm/tensor.hpp"

// Differentiable primitives. Every op computes its result eagerly and, when a
// tape is active and some input requires gradients, records a backward rule.
// Matrix ops take rank-2 tensors; a rank-1 tensor of length n is accepted
// wherever a 1 x n row is expected.
namespace aldnorm {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> transpose(const Tensor<T>& a);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);

// a[m x n] + bias[n], broadcast over rows.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> tanh(const Tensor<T>& a);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a);

template <typename T>
Tensor<T> relu(const Tensor<T>& a);

/// Numerically stable softmax along `axis` (the row max is subtracted before
/// exponentiating). Works for any rank.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// Concatenate rank-2 tensors along axis 0 (rows) or 1 (features).
template <typename T>
Tensor<T> concat(std::span<const Tensor<T>> parts, std::size_t axis);

template <typename T>
Tensor<T> concat(std::initializer_list<Tensor<T>> parts, std::size_t axis) {
  std::vector<Tensor<T>> v(parts);
  return concat<T>(std::span<const Tensor<T>>(v), axis);
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end);

/// Embedding lookup: row i of the result is row ids[i] of `table`.
/// Repeated ids accumulate their gradients into the same table row.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids);

/// Row-wise layer normalization with learned gain and bias (both length n).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5));

/// Inverted dropout. Identity when `training` is false or p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng, bool training);

/// Width-w 1-D convolution over the rows of x[c x d] followed by max-pooling
/// over time. filters is (w*d) x F where row k*d + j weights input feature j
/// at window offset k. The sequence is zero-padded by w/2 rows on each side,
/// so at least one window always exists. Returns 1 x F.
template <typename T>
Tensor<T> conv1d_maxpool(const Tensor<T>& x, const Tensor<T>& filters, const Tensor<T>& bias,
                         std::size_t width);

/// One LSTM step. state is 2 x H with row 0 = h and row 1 = c; the result has
/// the same layout. Gate order in the 4H columns: input, forget, cell, output.
template <typename T>
Tensor<T> lstm_cell(const Tensor<T>& x, const Tensor<T>& state, const Tensor<T>& w_x,
                    const Tensor<T>& w_h, const Tensor<T>& bias);

/// Sum over rows of -log softmax(logits)[row, target].
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets);

/// Sum over rows of -log p[row, target] for rows that are already probability
/// distributions. Probabilities below `floor` are clamped; each clamp bumps
/// *clamped when provided.
template <typename T>
Tensor<T> nll(const Tensor<T>& probs, std::span<const int> targets, T floor = T(1e-12),
              std::size_t* clamped = nullptr);

/// Sum of squared entries (squared Frobenius norm for matrices).
template <typename T>
Tensor<T> frobenius_sq(const Tensor<T>& x);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

/// Identity forward; backward negates the upstream gradient.
template <typename T>
Tensor<T> grad_reverse(const Tensor<T>& x);

}  // namespace aldnorm
