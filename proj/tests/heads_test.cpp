// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include <gtest/gtest.h>

#include <cmath>

#include "aldnorm/decoders.hpp"
#include "aldnorm/discriminator.hpp"
#include "aldnorm/errors.hpp"
#include "aldnorm/vocabulary.hpp"
#include "oracles.hpp"

namespace aldnorm {
namespace {

std::vector<Tensor<double>> leaves_of(const ParameterList<double>& params) {
  std::vector<Tensor<double>> out;
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

template <typename Fn>
double adam_fit(const ParameterList<double>& params, int steps, double lr, Fn loss_fn) {
  Adam<double> adam({.learning_rate = lr});
  double last = 0.0;
  for (int s = 0; s < steps; ++s) {
    zero_grads(params);
    Tape<double> tape;
    Tensor<double> loss;
    {
      TapeScope<double> scope(tape);
      loss = loss_fn();
    }
    last = loss.item();
    tape.backward(loss);
    clip_grad_norm(params, 5.0);
    adam.step(params);
  }
  return last;
}

TEST(ClassifierHead, OutputIsDistributionOverLabels) {
  Rng rng(1);
  ClassifierHead<double> head(4, 3, 3, rng);
  auto s = oracle::random_tensor({5, 4}, rng), p = oracle::random_tensor({5, 4}, rng);
  ForwardContext ctx;
  auto y = head.classify(s, p, {}, ctx);
  ASSERT_EQ(y.shape(), (Shape{1, 3}));
  EXPECT_NEAR(y[0] + y[1] + y[2], 1.0, 1e-6);
}

TEST(ClassifierHead, ZeroProjectionGivesExactlyUniform) {
  Rng rng(2);
  ClassifierHead<double> head(4, 3, 3, rng);
  for (auto& v : head.projection().weight.mutable_values()) v = 0.0;
  auto s = oracle::random_tensor({4, 4}, rng), p = oracle::random_tensor({4, 4}, rng);
  ForwardContext ctx;
  auto y = head.classify(s, p, {}, ctx);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(y[k], 1.0 / 3.0);
}

TEST(ClassifierHead, LengthMismatchIsContractError) {
  Rng rng(3);
  ClassifierHead<double> head(4, 3, 2, rng);
  ForwardContext ctx;
  EXPECT_THROW(head.classify(oracle::random_tensor({3, 4}, rng), oracle::random_tensor({4, 4}, rng), {}, ctx),
               ContractError);
}

TEST(ClassifierHead, PaddedPositionsAreIgnored) {
  Rng rng(4);
  ClassifierHead<double> head(2, 3, 2, rng);
  auto s = oracle::random_tensor({3, 2}, rng), p = oracle::random_tensor({3, 2}, rng);
  AttentionMask mask;
  mask.key_padding = {false, false, true};
  ForwardContext ctx;
  auto padded = head.classify(s, p, mask, ctx);
  auto trimmed = head.classify(slice_rows(s, 0, 2), slice_rows(p, 0, 2), {}, ctx);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(padded[k], trimmed[k]);
}

TEST(ClassifierHead, PassesFiniteDifferenceCheck) {
  Rng rng(5);
  ClassifierHead<double> head(3, 2, 3, rng);
  auto s = oracle::random_tensor({4, 3}, rng), p = oracle::random_tensor({4, 3}, rng);
  ParameterList<double> params;
  head.collect(params, "");
  auto leaves = leaves_of(params);
  leaves.push_back(s);
  leaves.push_back(p);
  ForwardContext ctx;
  const std::vector<int> gold{2};
  auto result = oracle::check_gradients(leaves, [&] { return nll(head.classify(s, p, {}, ctx), gold); });
  EXPECT_LT(result.max_rel_error, 1e-4);
}

TEST(ClassifierHead, OverfitsTenSentences) {
  Rng rng(6);
  ClassifierHead<double> head(4, 8, 3, rng);
  std::vector<std::pair<Tensor<double>, Tensor<double>>> inputs;
  std::vector<int> gold;
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 2 + rng.below(4);
    inputs.emplace_back(oracle::random_tensor({n, 4}, rng, -1, 1, false),
                        oracle::random_tensor({n, 4}, rng, -1, 1, false));
    gold.push_back(i % 3);
  }
  ParameterList<double> params;
  head.collect(params, "");
  ForwardContext ctx;
  adam_fit(params, 300, 1e-2, [&] {
    std::vector<Tensor<double>> terms;
    for (int i = 0; i < 10; ++i) {
      const int g = gold[i];
      terms.push_back(nll(head.classify(inputs[i].first, inputs[i].second, {}, ctx), std::span<const int>(&g, 1)));
    }
    return sum(concat<double>(std::span<const Tensor<double>>(terms), 0));
  });
  for (int i = 0; i < 10; ++i) {
    auto y = head.classify(inputs[i].first, inputs[i].second, {}, ctx);
    const auto v = y.values();
    EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(), gold[i]) << i;
  }
}

DecoderConfig tiny_decoder(std::size_t vocab) {
  DecoderConfig c;
  c.d_model = 8;
  c.memory_width = 6;
  c.heads = 2;
  c.layers = 2;
  c.target_vocab = vocab;
  c.max_len = 10;
  return c;
}

TEST(NormalizerDecoder, UniformOutputGivesLogVocabularyPerPosition) {
  Rng rng(7);
  NormalizerDecoder<double> dec(tiny_decoder(9), rng);
  for (auto& v : dec.projection().weight.mutable_values()) v = 0.0;
  auto memory = oracle::random_tensor({4, 6}, rng);
  ForwardContext ctx;
  const std::vector<int> gold{4, 5, 6};
  EXPECT_NEAR(dec.loss(memory, {}, gold, ctx).item(), std::log(9.0), 1e-12);
}

TEST(NormalizerDecoder, EmptyTargetIsContractError) {
  Rng rng(8);
  NormalizerDecoder<double> dec(tiny_decoder(9), rng);
  ForwardContext ctx;
  EXPECT_THROW(dec.loss(oracle::random_tensor({2, 6}, rng), {}, std::vector<int>{}, ctx), ContractError);
}

// Runs the decoder on each prefix separately; no batched causal masking is
// needed because the prefix never contains future tokens.
double stepwise_loss(const NormalizerDecoder<double>& dec, const Tensor<double>& memory, const std::vector<int>& gold) {
  std::vector<int> inputs{Vocabulary::kBos};
  inputs.insert(inputs.end(), gold.begin(), gold.end());
  std::vector<int> targets = gold;
  targets.push_back(Vocabulary::kEos);
  ForwardContext ctx;
  double total = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    std::vector<int> prefix(inputs.begin(), inputs.begin() + static_cast<long>(j) + 1);
    auto z = dec.logits(memory, {}, prefix, ctx);
    std::vector<double> row(z.cols());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = z.at(j, k);
    total -= std::log(oracle::naive_softmax(row)[targets[j]]);
  }
  return total / static_cast<double>(targets.size());
}

TEST(NormalizerDecoder, LossMatchesStepwiseOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    NormalizerDecoder<double> dec(tiny_decoder(12), rng);
    auto memory = oracle::random_tensor({1 + rng.below(5), 6}, rng);
    std::vector<int> gold(1 + rng.below(6));
    for (auto& g : gold) g = 4 + static_cast<int>(rng.below(8));
    ForwardContext ctx;
    EXPECT_NEAR(dec.loss(memory, {}, gold, ctx).item(), stepwise_loss(dec, memory, gold), 1e-10);
  }
}

TEST(NormalizerDecoder, CausalityIsBitwise) {
  Rng rng(10);
  NormalizerDecoder<double> dec(tiny_decoder(12), rng);
  auto memory = oracle::random_tensor({3, 6}, rng);
  const std::vector<int> a{2, 5, 6, 7, 8};
  ForwardContext ctx;
  auto base = dec.logits(memory, {}, a, ctx);
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    auto b = a;
    b[j + 1] = 11;
    auto perturbed = dec.logits(memory, {}, b, ctx);
    for (std::size_t row = 0; row <= j; ++row)
      for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(base.at(row, k), perturbed.at(row, k));
  }
}

TEST(NormalizerDecoder, EosFirstGivesEmptyOutput) {
  Rng rng(11);
  NormalizerDecoder<double> dec(tiny_decoder(9), rng);
  for (auto& v : dec.projection().weight.mutable_values()) v = 0.0;
  dec.projection().bias.mutable_values()[Vocabulary::kEos] = 5.0;
  auto r = dec.decode(oracle::random_tensor({3, 6}, rng), {}, 8, true);
  EXPECT_TRUE(r.tokens.empty());
  EXPECT_FALSE(r.truncated);
  ASSERT_EQ(r.trace.size(), 1u);
}

TEST(NormalizerDecoder, TraceTokensAreStepArgmax) {
  Rng rng(12);
  NormalizerDecoder<double> dec(tiny_decoder(9), rng);
  auto r = dec.decode(oracle::random_tensor({3, 6}, rng), {}, 6, true);
  ASSERT_FALSE(r.trace.empty());
  std::size_t emitted = 0;
  for (const auto& step : r.trace) {
    const auto& d = step.distribution;
    EXPECT_EQ(step.token, std::max_element(d.begin(), d.end()) - d.begin());
    if (step.token != Vocabulary::kEos) EXPECT_EQ(r.tokens.at(emitted++), step.token);
  }
  EXPECT_EQ(emitted, r.tokens.size());
  EXPECT_EQ(r.truncated, r.trace.back().token != Vocabulary::kEos);
}

TEST(NormalizerDecoder, TruncationIsFlagged) {
  Rng rng(13);
  NormalizerDecoder<double> dec(tiny_decoder(9), rng);
  for (auto& v : dec.projection().weight.mutable_values()) v = 0.0;
  dec.projection().bias.mutable_values()[5] = 5.0;
  auto r = dec.decode(oracle::random_tensor({3, 6}, rng), {}, 4);
  EXPECT_EQ(r.tokens, (std::vector<int>{5, 5, 5, 5}));
  EXPECT_TRUE(r.truncated);
  EXPECT_THROW(dec.decode(oracle::random_tensor({3, 6}, rng), {}, 11), SequenceLengthError);
}

TEST(NormalizerDecoder, PassesFiniteDifferenceCheck) {
  Rng rng(14);
  NormalizerDecoder<double> dec(tiny_decoder(7), rng);
  auto memory = oracle::random_tensor({3, 6}, rng);
  ParameterList<double> params;
  dec.collect(params, "");
  auto leaves = leaves_of(params);
  leaves.push_back(memory);
  ForwardContext ctx;
  const std::vector<int> gold{4, 6, 5};
  auto result = oracle::check_gradients(leaves, [&] { return dec.loss(memory, {}, gold, ctx); });
  EXPECT_LT(result.max_rel_error, 1e-4);
}

TEST(NormalizerDecoder, LearnsCopyTaskAndLossApproachesZero) {
  Rng rng(15);
  NormalizerDecoder<double> dec(tiny_decoder(8), rng);
  // memory rows encode the source tokens a=4, b=5, c=6
  auto memory = Tensor<double>::from({3, 6}, {1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0});
  const std::vector<int> gold{4, 5, 6};
  ParameterList<double> params;
  dec.collect(params, "");
  ForwardContext ctx;
  const double final_loss = adam_fit(params, 200, 1e-2, [&] { return dec.loss(memory, {}, gold, ctx); });
  EXPECT_LT(final_loss, 1e-2);
  EXPECT_EQ(dec.decode(memory, {}, 8).tokens, gold);
}

TEST(TaskDiscriminator, OutputIsTwoWayDistribution) {
  Rng rng(16);
  TaskDiscriminator<double> disc(4, 3, 2, rng);
  ForwardContext ctx;
  auto y = disc.discriminate(oracle::random_tensor({5, 4}, rng), {}, false, ctx);
  ASSERT_EQ(y.shape(), (Shape{1, 2}));
  EXPECT_NEAR(y[0] + y[1], 1.0, 1e-6);
}

TEST(TaskDiscriminator, ZeroProjectionGivesHalfHalf) {
  Rng rng(17);
  TaskDiscriminator<double> disc(4, 3, 2, rng);
  for (auto& v : disc.projection().weight.mutable_values()) v = 0.0;
  ForwardContext ctx;
  auto y = disc.discriminate(oracle::random_tensor({5, 4}, rng), {}, true, ctx);
  EXPECT_EQ(y[0], 0.5);
  EXPECT_EQ(y[1], 0.5);
}

TEST(TaskDiscriminator, ReversalNegatesUpstreamGradientsOnly) {
  Rng rng(18);
  EncoderConfig cfg;
  cfg.d_in = 5;
  cfg.d_model = 4;
  cfg.heads = 2;
  cfg.layers = 1;
  EncoderStack<double> shared(EncoderRole::shared, cfg, rng);
  TaskDiscriminator<double> disc(4, 3, 2, rng);
  auto x = oracle::random_tensor({4, 5}, rng, -1, 1, false);
  ParameterList<double> enc_params, disc_params;
  shared.collect(enc_params, "");
  disc.collect(disc_params, "");
  auto leaves = leaves_of(enc_params);
  const std::size_t n_enc = leaves.size();
  for (auto& t : leaves_of(disc_params)) leaves.push_back(t);
  ForwardContext ctx;
  const std::vector<int> task{static_cast<int>(TaskId::tn)};
  auto run = [&](bool reverse) {
    return oracle::gradients_of(leaves, [&] { return nll(disc.discriminate(shared.encode(x, {}, ctx), {}, reverse, ctx), task); });
  };
  auto plain = run(false), reversed = run(true);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = 0; j < plain[i].size(); ++j) {
      if (i < n_enc) {
        EXPECT_EQ(reversed[i][j], -plain[i][j]);
      } else {
        EXPECT_EQ(reversed[i][j], plain[i][j]);
      }
    }
  }
}

TEST(TaskDiscriminator, PassesFiniteDifferenceCheck) {
  Rng rng(19);
  TaskDiscriminator<double> disc(3, 2, 2, rng);
  auto s = oracle::random_tensor({4, 3}, rng);
  ParameterList<double> params;
  disc.collect(params, "");
  auto leaves = leaves_of(params);
  leaves.push_back(s);
  ForwardContext ctx;
  const std::vector<int> task{0};
  auto result = oracle::check_gradients(leaves, [&] { return nll(disc.discriminate(s, {}, false, ctx), task); });
  EXPECT_LT(result.max_rel_error, 1e-4);
}

}  // namespace
}  // namespace aldnorm
