// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aldnorm {

namespace {

template <typename T>
using Backward = std::function<void(Node<T>&)>;

template <typename T>
bool tracking(std::span<const Tensor<T>> inputs) {
  if (active_tape<T>() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor<T>& t) { return t.requires_grad(); });
}

template <typename T>
Tensor<T> emit(Shape shape, std::vector<T> values, const char* op,
               std::span<const Tensor<T>> inputs, Backward<T> backward) {
  auto out = Tensor<T>::from(std::move(shape), std::move(values));
  if (!tracking(inputs)) return out;
  Node<T>& node = *out.node();
  node.requires_grad = true;
  node.op = op;
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) node.inputs.push_back(in.node_ptr());
  node.backward = std::move(backward);
  active_tape<T>()->record(out.node_ptr());
  return out;
}

template <typename T>
Tensor<T> emit(Shape shape, std::vector<T> values, const char* op,
               std::initializer_list<Tensor<T>> inputs, Backward<T> backward) {
  return emit<T>(std::move(shape), std::move(values), op,
                 std::span<const Tensor<T>>(inputs.begin(), inputs.size()), std::move(backward));
}

// Gradient buffer of input i, or nullptr when that input does not need one.
template <typename T>
T* grad_in(Node<T>& self, std::size_t i) {
  Node<T>& in = *self.inputs[i];
  if (!in.requires_grad) return nullptr;
  in.ensure_grad();
  return in.grad.data();
}

template <typename T>
const T* value_in(const Node<T>& self, std::size_t i) {
  return self.inputs[i]->value.data();
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
  if (t.rank() > 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename T>
Tensor<T> elementwise_unary(const Tensor<T>& a, const char* op, T (*fwd)(T),
                            T (*dydx)(T x, T y)) {
  std::vector<T> out(a.numel());
  auto x = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
  return emit<T>(a.shape(), std::move(out), op, {a}, [dydx](Node<T>& self) {
    T* gx = grad_in(self, 0);
    if (!gx) return;
    const T* x = value_in(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * dydx(x[i], self.value[i]);
  });
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  const T* A = a.values().data();
  const T* B = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = A[i * k + p];
      const T* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return emit<T>({m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node<T>& self) {
    const T* dC = self.grad.data();
    const T* A = value_in(self, 0);
    const T* B = value_in(self, 1);
    if (T* dA = grad_in(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* dcrow = dC + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const T* brow = B + p * n;
          T acc = T(0);
          for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
          dA[i * k + p] += acc;
        }
      }
    }
    if (T* dB = grad_in(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        const T* dcrow = dC + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const T aip = A[i * k + p];
          T* dbrow = dB + p * n;
          for (std::size_t j = 0; j < n; ++j) dbrow[j] += aip * dcrow[j];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  auto x = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  return emit<T>({n, m}, std::move(out), "transpose", {a}, [m, n](Node<T>& self) {
    T* gx = grad_in(self, 0);
    if (!gx) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += self.grad[j * m + i];
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return emit<T>(a.shape(), std::move(out), "add", {a, b}, [](Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (T* g = grad_in(self, k))
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return emit<T>(a.shape(), std::move(out), "sub", {a, b}, [](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (T* g = grad_in(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
  });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias) {
  require_matrix(a, "add_bias");
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.numel() != n) {
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not fit " + shape_str(a.shape()));
  }
  std::vector<T> out(a.values().begin(), a.values().end());
  auto b = bias.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += b[j];
  return emit<T>(a.shape(), std::move(out), "add_bias", {a, bias}, [m, n](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (T* g = grad_in(self, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return emit<T>(a.shape(), std::move(out), "mul", {a, b}, [](Node<T>& self) {
    const T* x = value_in(self, 0);
    const T* y = value_in(self, 1);
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * y[i];
    if (T* g = grad_in(self, 1))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * x[i];
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  auto x = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return emit<T>(a.shape(), std::move(out), "scale", {a}, [factor](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return elementwise_unary<T>(
      a, "tanh", [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return elementwise_unary<T>(
      a, "sigmoid", [](T x) { return sigmoid_scalar(x); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return elementwise_unary<T>(
      a, "relu", [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  if (!x.defined() || axis >= x.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     (x.defined() ? shape_str(x.shape()) : std::string("[]")));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];

  std::vector<T> out(x.numel());
  auto in = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t q = 0; q < inner; ++q) {
      const std::size_t base = o * len * inner + q;
      T mx = in[base];
      for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, in[base + k * inner]);
      T total = T(0);
      for (std::size_t k = 0; k < len; ++k) {
        T e = std::exp(in[base + k * inner] - mx);
        out[base + k * inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < len; ++k) out[base + k * inner] /= total;
    }
  }
  return emit<T>(s, std::move(out), "softmax", {x}, [outer, inner, len](Node<T>& self) {
    T* gx = grad_in(self, 0);
    if (!gx) return;
    const T* y = self.value.data();
    const T* g = self.grad.data();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t q = 0; q < inner; ++q) {
        const std::size_t base = o * len * inner + q;
        T dot = T(0);
        for (std::size_t k = 0; k < len; ++k) dot += g[base + k * inner] * y[base + k * inner];
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t idx = base + k * inner;
          gx[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> concat(std::span<const Tensor<T>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_matrix(p, "concat");

  if (axis == 0) {
    const std::size_t n = parts[0].cols();
    std::size_t m = 0;
    for (const auto& p : parts) {
      if (p.cols() != n) {
        throw ShapeError("concat(rows): width mismatch " + shape_str(parts[0].shape()) + " vs " +
                         shape_str(p.shape()));
      }
      m += p.rows();
    }
    std::vector<T> out;
    out.reserve(m * n);
    for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
    return emit<T>({m, n}, std::move(out), "concat", parts, [](Node<T>& self) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < self.inputs.size(); ++k) {
        const std::size_t len = self.inputs[k]->value.size();
        if (T* g = grad_in(self, k))
          for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[offset + i];
        offset += len;
      }
    });
  }

  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw ShapeError("concat(features): row mismatch " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    n += p.cols();
  }
  std::vector<T> out(m * n);
  std::size_t col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].values();
    const std::size_t w = widths[k];
    for (std::size_t i = 0; i < m; ++i) std::copy_n(v.data() + i * w, w, out.data() + i * n + col);
    col += w;
  }
  return emit<T>({m, n}, std::move(out), "concat", parts, [m, n, widths](Node<T>& self) {
    std::size_t col = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      const std::size_t w = widths[k];
      if (T* g = grad_in(self, k))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[i * n + col + j];
      col += w;
    }
  });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_rows");
  if (begin >= end || end > x.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + shape_str(x.shape()));
  }
  const std::size_t n = x.cols();
  std::vector<T> out(x.values().begin() + begin * n, x.values().begin() + end * n);
  return emit<T>({end - begin, n}, std::move(out), "slice_rows", {x}, [begin, n](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * n + i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  if (begin >= end || end > x.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of range for " + shape_str(x.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols(), w = end - begin;
  std::vector<T> out(m * w);
  auto v = x.values();
  for (std::size_t i = 0; i < m; ++i) std::copy_n(v.data() + i * n + begin, w, out.data() + i * w);
  return emit<T>({m, w}, std::move(out), "slice_cols", {x}, [m, n, w, begin](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids) {
  require_matrix(table, "gather_rows");
  if (ids.empty()) throw ShapeError("gather_rows: empty id list");
  const std::size_t rows = table.rows(), d = table.cols();
  std::vector<T> out(ids.size() * d);
  auto v = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw RangeError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(rows) + " rows");
    }
    std::copy_n(v.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return emit<T>({ids.size(), d}, std::move(out), "gather_rows", {table},
                 [idx = std::move(idx), d](Node<T>& self) {
                   T* g = grad_in(self, 0);
                   if (!g) return;
                   for (std::size_t i = 0; i < idx.size(); ++i) {
                     T* row = g + static_cast<std::size_t>(idx[i]) * d;
                     for (std::size_t j = 0; j < d; ++j) row[j] += self.grad[i * d + j];
                   }
                 });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  if (gain.numel() != n || bias.numel() != n) {
    throw ShapeError("layer_norm: gain/bias " + shape_str(gain.shape()) + "/" + shape_str(bias.shape()) +
                     " do not fit " + shape_str(x.shape()));
  }
  std::vector<T> out(m * n), xhat(m * n), inv_std(m);
  auto v = x.values();
  auto g = gain.values();
  auto b = bias.values();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = v.data() + i * n;
    T mu = T(0);
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(n);
    inv_std[i] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (row[j] - mu) * inv_std[i];
      out[i * n + j] = g[j] * xhat[i * n + j] + b[j];
    }
  }
  return emit<T>(x.shape(), std::move(out), "layer_norm", {x, gain, bias},
                 [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<T>& self) {
                   const T* gy = self.grad.data();
                   const T* gain = value_in(self, 1);
                   if (T* gg = grad_in(self, 1))
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < n; ++j) gg[j] += gy[i * n + j] * xhat[i * n + j];
                   if (T* gb = grad_in(self, 2))
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < n; ++j) gb[j] += gy[i * n + j];
                   T* gx = grad_in(self, 0);
                   if (!gx) return;
                   for (std::size_t i = 0; i < m; ++i) {
                     T mean_d = T(0), mean_dx = T(0);
                     for (std::size_t j = 0; j < n; ++j) {
                       const T d = gy[i * n + j] * gain[j];
                       mean_d += d;
                       mean_dx += d * xhat[i * n + j];
                     }
                     mean_d /= static_cast<T>(n);
                     mean_dx /= static_cast<T>(n);
                     for (std::size_t j = 0; j < n; ++j) {
                       const T d = gy[i * n + j] * gain[j];
                       gx[i * n + j] += inv_std[i] * (d - mean_d - xhat[i * n + j] * mean_dx);
                     }
                   }
                 });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: probability must be in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (auto& m : mask) m = rng.bernoulli(1.0 - p) ? keep_scale : T(0);
  std::vector<T> out(x.numel());
  auto v = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * mask[i];
  return emit<T>(x.shape(), std::move(out), "dropout", {x}, [mask = std::move(mask)](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

template <typename T>
Tensor<T> conv1d_maxpool(const Tensor<T>& x, const Tensor<T>& filters, const Tensor<T>& bias,
                         std::size_t width) {
  require_matrix(x, "conv1d_maxpool");
  require_matrix(filters, "conv1d_maxpool");
  if (width == 0) throw ShapeError("conv1d_maxpool: filter width must be positive");
  const std::size_t c = x.rows(), d = x.cols(), F = filters.cols();
  if (filters.rows() != width * d || bias.numel() != F) {
    throw ShapeError("conv1d_maxpool: filters " + shape_str(filters.shape()) + " / bias " +
                     shape_str(bias.shape()) + " do not fit input " + shape_str(x.shape()) +
                     " with width " + std::to_string(width));
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(width / 2);
  const std::size_t windows = c + 2 * static_cast<std::size_t>(pad) - width + 1;
  auto xv = x.values();
  auto fv = filters.values();
  auto bv = bias.values();

  std::vector<T> out(F, -std::numeric_limits<T>::infinity());
  std::vector<std::size_t> argmax(F, 0);
  std::vector<T> act(F);
  for (std::size_t s = 0; s < windows; ++s) {
    std::copy(bv.begin(), bv.end(), act.begin());
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(s + k) - pad;
      if (r < 0 || r >= static_cast<std::ptrdiff_t>(c)) continue;
      for (std::size_t j = 0; j < d; ++j) {
        const T xj = xv[static_cast<std::size_t>(r) * d + j];
        const T* frow = fv.data() + (k * d + j) * F;
        for (std::size_t f = 0; f < F; ++f) act[f] += xj * frow[f];
      }
    }
    for (std::size_t f = 0; f < F; ++f) {
      if (act[f] > out[f]) {
        out[f] = act[f];
        argmax[f] = s;
      }
    }
  }
  return emit<T>({1, F}, std::move(out), "conv1d_maxpool", {x, filters, bias},
                 [c, d, F, width, pad, argmax = std::move(argmax)](Node<T>& self) {
                   const T* xv = value_in(self, 0);
                   const T* fv = value_in(self, 1);
                   T* gx = grad_in(self, 0);
                   T* gf = grad_in(self, 1);
                   T* gb = grad_in(self, 2);
                   for (std::size_t f = 0; f < F; ++f) {
                     const T g = self.grad[f];
                     if (gb) gb[f] += g;
                     for (std::size_t k = 0; k < width; ++k) {
                       const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(argmax[f] + k) - pad;
                       if (r < 0 || r >= static_cast<std::ptrdiff_t>(c)) continue;
                       const std::size_t ru = static_cast<std::size_t>(r);
                       for (std::size_t j = 0; j < d; ++j) {
                         const std::size_t fi = (k * d + j) * F + f;
                         if (gf) gf[fi] += xv[ru * d + j] * g;
                         if (gx) gx[ru * d + j] += fv[fi] * g;
                       }
                     }
                   }
                 });
}

template <typename T>
Tensor<T> lstm_cell(const Tensor<T>& x, const Tensor<T>& state, const Tensor<T>& w_x,
                    const Tensor<T>& w_h, const Tensor<T>& bias) {
  require_matrix(x, "lstm_cell");
  require_matrix(state, "lstm_cell");
  if (x.rows() != 1) throw ShapeError("lstm_cell: input must be a single row, got " + shape_str(x.shape()));
  const std::size_t in = x.cols();
  const std::size_t H = state.cols();
  if (state.rows() != 2 || w_x.rows() != in || w_x.cols() != 4 * H || w_h.rows() != H ||
      w_h.cols() != 4 * H || bias.numel() != 4 * H) {
    throw ShapeError("lstm_cell: incompatible shapes x" + shape_str(x.shape()) + " state" +
                     shape_str(state.shape()) + " w_x" + shape_str(w_x.shape()) + " w_h" +
                     shape_str(w_h.shape()) + " bias" + shape_str(bias.shape()));
  }
  auto xv = x.values();
  auto sv = state.values();
  auto wx = w_x.values();
  auto wh = w_h.values();
  auto bv = bias.values();
  const T* h_prev = sv.data();
  const T* c_prev = sv.data() + H;

  std::vector<T> gates(bv.begin(), bv.end());
  for (std::size_t p = 0; p < in; ++p) {
    const T xp = xv[p];
    const T* row = wx.data() + p * 4 * H;
    for (std::size_t q = 0; q < 4 * H; ++q) gates[q] += xp * row[q];
  }
  for (std::size_t p = 0; p < H; ++p) {
    const T hp = h_prev[p];
    const T* row = wh.data() + p * 4 * H;
    for (std::size_t q = 0; q < 4 * H; ++q) gates[q] += hp * row[q];
  }
  for (std::size_t q = 0; q < H; ++q) {
    gates[q] = sigmoid_scalar(gates[q]);
    gates[H + q] = sigmoid_scalar(gates[H + q]);
    gates[2 * H + q] = std::tanh(gates[2 * H + q]);
    gates[3 * H + q] = sigmoid_scalar(gates[3 * H + q]);
  }
  std::vector<T> out(2 * H), tanh_c(H);
  for (std::size_t q = 0; q < H; ++q) {
    const T c = gates[H + q] * c_prev[q] + gates[q] * gates[2 * H + q];
    tanh_c[q] = std::tanh(c);
    out[H + q] = c;
    out[q] = gates[3 * H + q] * tanh_c[q];
  }
  return emit<T>({2, H}, std::move(out), "lstm_cell", {x, state, w_x, w_h, bias},
                 [in, H, gates = std::move(gates), tanh_c = std::move(tanh_c)](Node<T>& self) {
                   const T* dh = self.grad.data();
                   const T* dc_out = self.grad.data() + H;
                   const T* xv = value_in(self, 0);
                   const T* sv = value_in(self, 1);
                   const T* wx = value_in(self, 2);
                   const T* wh = value_in(self, 3);
                   const T* c_prev = sv + H;

                   std::vector<T> dz(4 * H), dc_prev(H);
                   for (std::size_t q = 0; q < H; ++q) {
                     const T i = gates[q], f = gates[H + q], g = gates[2 * H + q], o = gates[3 * H + q];
                     const T tc = tanh_c[q];
                     const T d_o = dh[q] * tc;
                     const T dc = dc_out[q] + dh[q] * o * (T(1) - tc * tc);
                     dz[q] = dc * g * i * (T(1) - i);
                     dz[H + q] = dc * c_prev[q] * f * (T(1) - f);
                     dz[2 * H + q] = dc * i * (T(1) - g * g);
                     dz[3 * H + q] = d_o * o * (T(1) - o);
                     dc_prev[q] = dc * f;
                   }
                   if (T* gx = grad_in(self, 0)) {
                     for (std::size_t p = 0; p < in; ++p) {
                       const T* row = wx + p * 4 * H;
                       T acc = T(0);
                       for (std::size_t q = 0; q < 4 * H; ++q) acc += dz[q] * row[q];
                       gx[p] += acc;
                     }
                   }
                   if (T* gs = grad_in(self, 1)) {
                     for (std::size_t p = 0; p < H; ++p) {
                       const T* row = wh + p * 4 * H;
                       T acc = T(0);
                       for (std::size_t q = 0; q < 4 * H; ++q) acc += dz[q] * row[q];
                       gs[p] += acc;
                       gs[H + p] += dc_prev[p];
                     }
                   }
                   if (T* gwx = grad_in(self, 2)) {
                     for (std::size_t p = 0; p < in; ++p) {
                       const T xp = xv[p];
                       T* row = gwx + p * 4 * H;
                       for (std::size_t q = 0; q < 4 * H; ++q) row[q] += xp * dz[q];
                     }
                   }
                   if (T* gwh = grad_in(self, 3)) {
                     for (std::size_t p = 0; p < H; ++p) {
                       const T hp = sv[p];
                       T* row = gwh + p * 4 * H;
                       for (std::size_t q = 0; q < 4 * H; ++q) row[q] += hp * dz[q];
                     }
                   }
                   if (T* gb = grad_in(self, 4))
                     for (std::size_t q = 0; q < 4 * H; ++q) gb[q] += dz[q];
                 });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets) {
  require_matrix(logits, "cross_entropy");
  const std::size_t m = logits.rows(), K = logits.cols();
  if (targets.size() != m) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     shape_str(logits.shape()) + " logits");
  }
  auto z = logits.values();
  std::vector<T> probs(m * K);
  T loss = T(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= K) {
      throw RangeError("cross_entropy: target " + std::to_string(targets[i]) + " outside " +
                       std::to_string(K) + " classes");
    }
    const T* row = z.data() + i * K;
    T mx = *std::max_element(row, row + K);
    T total = T(0);
    for (std::size_t k = 0; k < K; ++k) {
      probs[i * K + k] = std::exp(row[k] - mx);
      total += probs[i * K + k];
    }
    for (std::size_t k = 0; k < K; ++k) probs[i * K + k] /= total;
    loss += std::log(total) + mx - row[targets[i]];
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  return emit<T>({1}, {loss}, "cross_entropy", {logits},
                 [K, probs = std::move(probs), tgt = std::move(tgt)](Node<T>& self) {
                   T* g = grad_in(self, 0);
                   if (!g) return;
                   const T up = self.grad[0];
                   for (std::size_t i = 0; i < tgt.size(); ++i) {
                     for (std::size_t k = 0; k < K; ++k) g[i * K + k] += up * probs[i * K + k];
                     g[i * K + static_cast<std::size_t>(tgt[i])] -= up;
                   }
                 });
}

template <typename T>
Tensor<T> nll(const Tensor<T>& probs, std::span<const int> targets, T floor, std::size_t* clamped) {
  require_matrix(probs, "nll");
  const std::size_t m = probs.rows(), K = probs.cols();
  if (targets.size() != m) {
    throw ShapeError("nll: " + std::to_string(targets.size()) + " targets for " +
                     shape_str(probs.shape()) + " probabilities");
  }
  auto p = probs.values();
  T loss = T(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= K) {
      throw RangeError("nll: target " + std::to_string(targets[i]) + " outside " + std::to_string(K) +
                       " classes");
    }
    T pg = p[i * K + static_cast<std::size_t>(targets[i])];
    if (pg < floor) {
      pg = floor;
      if (clamped) ++*clamped;
    }
    loss -= std::log(pg);
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  return emit<T>({1}, {loss}, "nll", {probs}, [K, floor, tgt = std::move(tgt)](Node<T>& self) {
    T* g = grad_in(self, 0);
    if (!g) return;
    const T* p = value_in(self, 0);
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      const std::size_t idx = i * K + static_cast<std::size_t>(tgt[i]);
      if (p[idx] >= floor) g[idx] -= self.grad[0] / p[idx];
    }
  });
}

template <typename T>
Tensor<T> frobenius_sq(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.values()) total += v * v;
  return emit<T>({1}, {total}, "frobenius_sq", {x}, [](Node<T>& self) {
    T* g = grad_in(self, 0);
    if (!g) return;
    const T* v = value_in(self, 0);
    const T up = self.grad[0];
    for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) g[i] += T(2) * v[i] * up;
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.values()) total += v;
  return emit<T>({1}, {total}, "sum", {x}, [](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) g[i] += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  const T n = static_cast<T>(x.numel());
  T total = T(0);
  for (T v : x.values()) total += v;
  return emit<T>({1}, {total / n}, "mean", {x}, [n](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) g[i] += self.grad[0] / n;
  });
}

template <typename T>
Tensor<T> grad_reverse(const Tensor<T>& x) {
  std::vector<T> out(x.values().begin(), x.values().end());
  return emit<T>(x.shape(), std::move(out), "grad_reverse", {x}, [](Node<T>& self) {
    if (T* g = grad_in(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += -self.grad[i];
  });
}

#define ALDNORM_INSTANTIATE_OPS(T)                                                                   \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> transpose(const Tensor<T>&);                                                  \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> scale(const Tensor<T>&, T);                                                   \
  template Tensor<T> tanh(const Tensor<T>&);                                                       \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                    \
  template Tensor<T> relu(const Tensor<T>&);                                                       \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                       \
  template Tensor<T> concat(std::span<const Tensor<T>>, std::size_t);                              \
  template Tensor<T> slice_rows(const Tensor<T>&, std::size_t, std::size_t);                       \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);                       \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const int>);                          \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);          \
  template Tensor<T> dropout(const Tensor<T>&, double, Rng&, bool);                                \
  template Tensor<T> conv1d_maxpool(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                    std::size_t);                                                  \
  template Tensor<T> lstm_cell(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,               \
                               const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);                        \
  template Tensor<T> nll(const Tensor<T>&, std::span<const int>, T, std::size_t*);                 \
  template Tensor<T> frobenius_sq(const Tensor<T>&);                                               \
  template Tensor<T> sum(const Tensor<T>&);                                                        \
  template Tensor<T> mean(const Tensor<T>&);                                                       \
  template Tensor<T> grad_reverse(const Tensor<T>&);

ALDNORM_INSTANTIATE_OPS(float)
ALDNORM_INSTANTIATE_OPS(double)

#undef ALDNORM_INSTANTIATE_OPS

}  // namespace aldnorm
