// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code path it is used to check: matrix products
// are triple loops, gradients are central differences of forward evaluations.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "aldnorm/attention.hpp"
#include "aldnorm/random.hpp"
#include "aldnorm/tensor.hpp"

namespace aldnorm::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const Tensor<double>& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) acc += a[i][k] * b[k][j];
      c[i][j] = acc;
    }
  return c;
}

inline Matrix naive_transpose(const Matrix& a) {
  Matrix t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline std::vector<double> naive_softmax(const std::vector<double>& x) {
  double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> e(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += (e[i] = std::exp(x[i] - mx));
  for (auto& v : e) v /= total;
  return e;
}

inline Tensor<double> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                                    bool requires_grad = true) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor<double>::from(std::move(shape), std::move(v), requires_grad);
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
};

// Relative error with a floor on the denominator so exactly-zero gradients
// compare absolutely.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares backward() against central differences of `loss_fn` for every
// element of every leaf. `loss_fn` must rebuild the graph from the leaves on
// each call and return a scalar.
inline GradCheckResult check_gradients(std::vector<Tensor<double>> leaves,
                                       const std::function<Tensor<double>()>& loss_fn, double h = 1e-5) {
  for (auto& l : leaves) l.zero_grad();
  {
    Tape<double> tape;
    Tensor<double> loss;
    {
      TapeScope<double> scope(tape);
      loss = loss_fn();
    }
    tape.backward(loss);
  }
  GradCheckResult result;
  for (auto& leaf : leaves) {
    std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
    auto values = leaf.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_fn().item();
      values[i] = saved - h;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[i], numeric));
      result.max_abs_analytic = std::max(result.max_abs_analytic, std::abs(analytic[i]));
    }
  }
  return result;
}

// Runs backward on a freshly recorded loss and returns the leaf gradients.
inline std::vector<std::vector<double>> gradients_of(std::vector<Tensor<double>> leaves,
                                                     const std::function<Tensor<double>()>& loss_fn) {
  for (auto& l : leaves) l.zero_grad();
  Tape<double> tape;
  Tensor<double> loss;
  {
    TapeScope<double> scope(tape);
    loss = loss_fn();
  }
  tape.backward(loss);
  std::vector<std::vector<double>> out;
  for (auto& l : leaves) out.emplace_back(l.grad().begin(), l.grad().end());
  return out;
}

// Scaled dot-product attention written out element by element. mask[i][j]
// true hides key j from query i.
inline Matrix naive_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                              const std::vector<std::vector<bool>>& mask = {}) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(k[0].size()));
  Matrix out(q.size(), std::vector<double>(v[0].size(), 0.0));
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<double> s;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (!mask.empty() && mask[i][j]) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < k[0].size(); ++c) dot += q[i][c] * k[j][c];
      s.push_back(dot * scale);
      keep.push_back(j);
    }
    auto w = naive_softmax(s);
    for (std::size_t a = 0; a < keep.size(); ++a)
      for (std::size_t c = 0; c < v[0].size(); ++c) out[i][c] += w[a] * v[keep[a]][c];
  }
  return out;
}

// ||p^T s||_F^2 as a sum over d x d entries of row-wise products.
inline double naive_diff_term(const Matrix& p, const Matrix& s) {
  double total = 0.0;
  for (std::size_t a = 0; a < p[0].size(); ++a)
    for (std::size_t b = 0; b < s[0].size(); ++b) {
      double entry = 0.0;
      for (std::size_t t = 0; t < p.size(); ++t) entry += p[t][a] * s[t][b];
      total += entry * entry;
    }
  return total;
}

// Direct evaluation of softmax(Q K^T / sqrt(d_k)) V with masked keys dropped
// from the normalization entirely.
inline std::pair<Matrix, Matrix> attention_oracle(const Matrix& q, const Matrix& k, const Matrix& v,
                                           const AttentionMask& mask) {
  const std::size_t nq = q.size(), nk = k.size(), dk = q[0].size(), dv = v[0].size();
  Matrix w(nq, std::vector<double>(nk, 0.0)), out(nq, std::vector<double>(dv, 0.0));
  for (std::size_t i = 0; i < nq; ++i) {
    double mx = -1e300;
    std::vector<double> s(nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      if (mask.blocked(i, j)) continue;
      for (std::size_t d = 0; d < dk; ++d) s[j] += q[i][d] * k[j][d];
      s[j] /= std::sqrt(static_cast<double>(dk));
      mx = std::max(mx, s[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < nk; ++j) {
      if (!mask.blocked(i, j)) z += (w[i][j] = std::exp(s[j] - mx));
    }
    for (std::size_t j = 0; j < nk; ++j) {
      w[i][j] /= z;
      for (std::size_t d = 0; d < dv; ++d) out[i][d] += w[i][j] * v[j][d];
    }
  }
  return {out, w};
}

inline Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
  auto y = naive_matmul(x, w);
  for (auto& row : y)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  return y;
}

// Per-head projections and attention, concatenated and mapped through W_o.
inline Matrix multi_head_oracle(const MultiHeadAttention<double>& mha, const Matrix& x, const AttentionMask& mask) {
  Matrix joined(x.size());
  for (std::size_t h = 0; h < mha.heads(); ++h) {
    auto q = naive_matmul(x, to_matrix(mha.wq(h)));
    auto k = naive_matmul(x, to_matrix(mha.wk(h)));
    auto v = naive_matmul(x, to_matrix(mha.wv(h)));
    auto [out, w] = attention_oracle(q, k, v, mask);
    for (std::size_t i = 0; i < x.size(); ++i) joined[i].insert(joined[i].end(), out[i].begin(), out[i].end());
  }
  std::vector<double> bo(mha.bo().values().begin(), mha.bo().values().end());
  return affine(joined, to_matrix(mha.wo()), bo);
}

// One Adam update of a single scalar, bias-corrected at step t (1-based).
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double x, double g, double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

struct WeightedScores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Support-weighted P/R/F1 counted straight from the (gold, predicted) pairs.
inline WeightedScores naive_weighted_scores(const std::vector<int>& gold, const std::vector<int>& pred,
                                            std::size_t labels) {
  WeightedScores w;
  for (std::size_t k = 0; k < labels; ++k) {
    double tp = 0, predicted = 0, support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i] == static_cast<int>(k), p = pred[i] == static_cast<int>(k);
      tp += g && p;
      predicted += p;
      support += g;
    }
    const double prec = predicted > 0 ? tp / predicted : 0.0;
    const double rec = support > 0 ? tp / support : 0.0;
    const double f = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    w.precision += support * prec;
    w.recall += support * rec;
    w.f1 += support * f;
  }
  const double n = static_cast<double>(gold.size());
  w.precision /= n;
  w.recall /= n;
  w.f1 /= n;
  return w;
}

}  // namespace aldnorm::oracle
