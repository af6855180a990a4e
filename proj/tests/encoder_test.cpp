// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "aldnorm/encoder.hpp"
#include "aldnorm/errors.hpp"
#include "oracles.hpp"

namespace aldnorm {
namespace {

using oracle::Matrix;
using oracle::affine;
using oracle::attention_oracle;
using oracle::multi_head_oracle;

void expect_matrix_near(const Tensor<double>& got, const Matrix& want, double tol) {
  ASSERT_EQ(got.rows(), want.size());
  ASSERT_EQ(got.cols(), want[0].size());
  for (std::size_t i = 0; i < want.size(); ++i)
    for (std::size_t j = 0; j < want[0].size(); ++j) EXPECT_NEAR(got.at(i, j), want[i][j], tol) << i << "," << j;
}

TEST(ScaledDotAttention, IdenticalKeysGiveUniformWeightsAndMeanValue) {
  Rng rng(1);
  auto q = oracle::random_tensor({3, 4}, rng);
  auto row = oracle::random_tensor({1, 4}, rng);
  auto k = concat({row, row, row, row}, 0);
  auto v = oracle::random_tensor({4, 2}, rng);
  AttentionMask mask;
  mask.key_padding = {false, false, true, false};
  auto r = scaled_dot_attention(q, k, v, mask);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(r.weights.at(i, j), j == 2 ? 0.0 : 1.0 / 3.0, 1e-15);
    for (std::size_t d = 0; d < 2; ++d) {
      EXPECT_NEAR(r.output.at(i, d), (v.at(0, d) + v.at(1, d) + v.at(3, d)) / 3.0, 1e-14);
    }
  }
}

TEST(ScaledDotAttention, SingleTokenReturnsValue) {
  Rng rng(2);
  auto q = oracle::random_tensor({1, 3}, rng);
  auto k = oracle::random_tensor({1, 3}, rng);
  auto v = oracle::random_tensor({1, 5}, rng);
  auto r = scaled_dot_attention(q, k, v);
  EXPECT_EQ(r.weights.item(), 1.0);
  for (std::size_t d = 0; d < 5; ++d) EXPECT_EQ(r.output[d], v[d]);
}

TEST(ScaledDotAttention, MatchesDirectFormulaOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(6), dk = 1 + rng.below(5), dv = 1 + rng.below(5);
    auto q = oracle::random_tensor({n, dk}, rng, -2, 2);
    auto k = oracle::random_tensor({n, dk}, rng, -2, 2);
    auto v = oracle::random_tensor({n, dv}, rng, -2, 2);
    AttentionMask mask;
    if (n > 1 && rng.bernoulli(0.5)) {
      mask.key_padding.assign(n, false);
      for (std::size_t j = 1; j < n; ++j) mask.key_padding[j] = rng.bernoulli(0.3);
    }
    mask.causal = rng.bernoulli(0.3);
    auto r = scaled_dot_attention(q, k, v, mask);
    auto [out, w] = attention_oracle(oracle::to_matrix(q), oracle::to_matrix(k), oracle::to_matrix(v), mask);
    expect_matrix_near(r.output, out, 1e-12);
    expect_matrix_near(r.weights, w, 1e-12);
  }
}

TEST(ScaledDotAttention, FullyMaskedRowIsContractError) {
  Rng rng(4);
  auto x = oracle::random_tensor({2, 2}, rng);
  AttentionMask mask;
  mask.key_padding = {true, true};
  EXPECT_THROW(scaled_dot_attention(x, x, x, mask), ContractError);
}

TEST(ScaledDotAttention, MaskedColumnsAreExactlyZero) {
  Rng rng(5);
  auto x = oracle::random_tensor({4, 3}, rng, -50, 50);
  AttentionMask mask;
  mask.key_padding = {false, true, false, true};
  auto r = scaled_dot_attention(x, x, x, mask);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.weights.at(i, 1), 0.0);
    EXPECT_EQ(r.weights.at(i, 3), 0.0);
  }
}

// Oracle for multi-head: per-head oracle attentions, concatenated in head
// order, then W_o and b_o.
TEST(MultiHead, IndivisibleWidthIsConfigError) {
  Rng rng(6);
  EXPECT_THROW(MultiHeadAttention<double>(6, 6, 6, 4, rng), ConfigError);
}

TEST(MultiHead, SingleHeadEqualsProjectedAttentionThenOutputMap) {
  Rng rng(7);
  MultiHeadAttention<double> mha(6, 6, 6, 1, rng);
  auto x = oracle::random_tensor({4, 6}, rng);
  auto got = mha.forward(x, x, {});
  auto r = scaled_dot_attention(matmul(x, mha.wq(0)), matmul(x, mha.wk(0)), matmul(x, mha.wv(0)));
  auto want = add_bias(matmul(r.output, mha.wo()), mha.bo());
  ASSERT_EQ(got.shape(), (Shape{4, 6}));
  for (std::size_t i = 0; i < got.numel(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(MultiHead, MatchesPerHeadOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t heads = 1 + rng.below(4), dk = 1 + rng.below(3), d = heads * dk, n = 1 + rng.below(6);
    MultiHeadAttention<double> mha(d, d, d, heads, rng);
    auto x = oracle::random_tensor({n, d}, rng);
    AttentionMask mask;
    if (n > 1 && rng.bernoulli(0.5)) {
      mask.key_padding.assign(n, false);
      mask.key_padding[n - 1] = true;
    }
    auto got = mha.forward(x, x, mask);
    expect_matrix_near(got, multi_head_oracle(mha, oracle::to_matrix(x), mask), 1e-12);
  }
}

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.d_in = 6;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 2;
  c.max_len = 10;
  return c;
}

TEST(EncoderStack, OutputShapeForEveryRole) {
  for (auto role : {EncoderRole::shared, EncoderRole::ald_private, EncoderRole::tn_private}) {
    Rng rng(9);
    EncoderStack<double> stack(role, tiny_config(), rng);
    auto x = oracle::random_tensor({5, 6}, rng);
    ForwardContext ctx;
    EXPECT_EQ(stack.encode(x, {}, ctx).shape(), (Shape{5, 8})) << role_name(role);
  }
}

TEST(EncoderStack, DeterministicWithoutDropout) {
  Rng rng(10);
  EncoderStack<double> stack(EncoderRole::shared, tiny_config(), rng);
  auto x = oracle::random_tensor({5, 6}, rng);
  ForwardContext ctx;
  auto a = stack.encode(x, {}, ctx), b = stack.encode(x, {}, ctx);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(EncoderStack, SequenceLengthError) {
  Rng rng(11);
  EncoderStack<double> stack(EncoderRole::shared, tiny_config(), rng);
  ForwardContext ctx;
  EXPECT_THROW(stack.encode(oracle::random_tensor({11, 6}, rng), {}, ctx), SequenceLengthError);
  EXPECT_THROW(stack.encode(oracle::random_tensor({3, 5}, rng), {}, ctx), ShapeError);
}

TEST(EncoderStack, AttentionRecordRowsSumToOneAndPadColumnsAreZero) {
  Rng rng(12);
  EncoderStack<double> stack(EncoderRole::tn_private, tiny_config(), rng);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    auto x = oracle::random_tensor({n, 6}, rng, -3, 3);
    AttentionMask mask;
    mask.key_padding.assign(n, false);
    mask.key_padding[n - 1] = true;
    if (n > 3) mask.key_padding[n - 2] = true;
    AttentionRecord rec;
    ForwardContext ctx;
    stack.encode(x, mask, ctx, &rec);
    ASSERT_EQ(rec.length, n);
    ASSERT_EQ(rec.weights.size(), 2u);
    for (const auto& layer : rec.weights) {
      ASSERT_EQ(layer.size(), 2u);
      for (const auto& m : layer) {
        for (std::size_t i = 0; i < n; ++i) {
          double total = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double w = m[i * n + j];
            EXPECT_GE(w, 0.0);
            EXPECT_LE(w, 1.0);
            total += w;
            if (mask.key_padding[j]) EXPECT_EQ(w, 0.0);
          }
          EXPECT_NEAR(total, 1.0, 1e-6);
        }
      }
    }
  }
}

TEST(EncoderStack, EveryParameterPassesFiniteDifferenceCheck) {
  Rng rng(13);
  EncoderStack<double> stack(EncoderRole::shared, tiny_config(), rng);
  auto x = oracle::random_tensor({5, 6}, rng, -1, 1, false);
  auto probe = oracle::random_tensor({5, 8}, rng, -1, 1, false);
  ParameterList<double> params;
  stack.collect(params, "");
  std::vector<Tensor<double>> leaves;
  for (auto& p : params) leaves.push_back(p.tensor);
  ForwardContext ctx;
  auto result = oracle::check_gradients(leaves, [&] { return sum(mul(stack.encode(x, {}, ctx), probe)); });
  EXPECT_LT(result.max_rel_error, 1e-4);
  EXPECT_GT(result.max_abs_analytic, 0.0);
}

TEST(EncoderStack, StacksShareNoStorage) {
  Rng rng(14);
  EncoderStack<double> a(EncoderRole::ald_private, tiny_config(), rng);
  EncoderStack<double> b(EncoderRole::tn_private, tiny_config(), rng);
  EncoderStack<double> s(EncoderRole::shared, tiny_config(), rng);
  ParameterList<double> pa, pb, ps;
  a.collect(pa, "");
  b.collect(pb, "");
  s.collect(ps, "");
  std::set<const void*> seen;
  for (auto* list : {&pa, &pb, &ps})
    for (auto& p : *list) EXPECT_TRUE(seen.insert(p.tensor.node_ptr().get()).second) << p.name;

  std::vector<double> before_b, before_s;
  for (auto& p : pb) before_b.insert(before_b.end(), p.tensor.values().begin(), p.tensor.values().end());
  for (auto& p : ps) before_s.insert(before_s.end(), p.tensor.values().begin(), p.tensor.values().end());
  for (auto& p : pa)
    for (auto& v : p.tensor.mutable_values()) v += 1.0;
  std::vector<double> after_b, after_s;
  for (auto& p : pb) after_b.insert(after_b.end(), p.tensor.values().begin(), p.tensor.values().end());
  for (auto& p : ps) after_s.insert(after_s.end(), p.tensor.values().begin(), p.tensor.values().end());
  EXPECT_EQ(before_b, after_b);
  EXPECT_EQ(before_s, after_s);
}

TEST(AttentionDump, RoundTripsRecordedMatrices) {
  Rng rng(15);
  EncoderStack<double> stack(EncoderRole::shared, tiny_config(), rng);
  auto x = oracle::random_tensor({3, 6}, rng);
  AttentionRecord rec;
  ForwardContext ctx;
  stack.encode(x, {}, ctx, &rec);
  std::stringstream io;
  write_attention_dump(io, "shared", {"u", "r", "lol"}, rec);
  auto entries = read_attention_dump(io);
  ASSERT_EQ(entries.size(), 4u);
  for (const auto& e : entries) {
    EXPECT_EQ(e.role, "shared");
    EXPECT_EQ(e.tokens, (std::vector<std::string>{"u", "r", "lol"}));
    ASSERT_EQ(e.matrix.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(e.matrix[i][j], rec.weights[e.layer][e.head][i * 3 + j]);
  }
}

TEST(AttentionDump, MalformedInputNamesLine) {
  std::stringstream io("attention\tshared\t0\t0\t2\ntokens\ta\tb\n0.5\t0.5\n");
  try {
    read_attention_dump(io);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(EncoderRole, NamesRoundTrip) {
  for (auto role : {EncoderRole::shared, EncoderRole::ald_private, EncoderRole::tn_private}) {
    EXPECT_EQ(parse_role(role_name(role)), role);
  }
  EXPECT_FALSE(parse_role("decoder").has_value());
}

}  // namespace
}  // namespace aldnorm
