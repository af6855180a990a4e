// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "aldnorm/corpus.hpp"
#include "aldnorm/errors.hpp"
#include "aldnorm/losses.hpp"
#include "aldnorm/metrics.hpp"
#include "oracles.hpp"

namespace aldnorm {
namespace {

Tensor<double> row(std::vector<double> p) {
  const std::size_t k = p.size();
  return Tensor<double>::from({1, k}, std::move(p));
}

Tensor<double> scalar(double x) { return Tensor<double>::from({1}, {x}); }

std::vector<Tensor<double>> random_distributions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Tensor<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z(k);
    for (auto& x : z) x = rng.uniform(-3.0, 3.0);
    out.push_back(row(oracle::naive_softmax(z)));
  }
  return out;
}

TEST(TaskLoss, PerfectPredictionsGiveZero) {
  std::vector<Tensor<double>> d{row({1.0, 0.0, 0.0}), row({0.0, 1.0, 0.0})};
  const int gold[] = {0, 1};
  EXPECT_EQ(task_loss(std::span<const Tensor<double>>(d), gold).item(), 0.0);
}

TEST(TaskLoss, UniformIsNLogK) {
  std::vector<Tensor<double>> d(5, row({0.25, 0.25, 0.25, 0.25}));
  const int gold[] = {0, 1, 2, 3, 0};
  EXPECT_NEAR(task_loss(std::span<const Tensor<double>>(d), gold).item(), 5 * std::log(4.0), 1e-12);
}

TEST(TaskLoss, MatchesDirectSummation) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(8), k = 2 + rng.below(4);
    auto d = random_distributions(n, k, rng);
    std::vector<int> gold(n);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng.below(k));
      expected -= std::log(d[i][static_cast<std::size_t>(gold[i])]);
    }
    EXPECT_NEAR(task_loss(std::span<const Tensor<double>>(d), gold).item(), expected, 1e-10);
  }
}

TEST(TaskLoss, ZeroProbabilityIsClampedAndCounted) {
  std::vector<Tensor<double>> d{row({1.0, 0.0}), row({0.0, 1.0})};
  const int gold[] = {1, 1};
  std::size_t clamped = 0;
  const double loss = task_loss(std::span<const Tensor<double>>(d), gold, &clamped).item();
  EXPECT_EQ(clamped, 1u);
  EXPECT_NEAR(loss, -std::log(1e-12), 1e-9);
}

TEST(TaskLoss, InvalidGoldIsRejected) {
  std::vector<Tensor<double>> d{row({0.5, 0.5})};
  const int gold[] = {2};
  EXPECT_THROW(task_loss(std::span<const Tensor<double>>(d), gold), Error);
}

TEST(AdvLoss, ChanceIsLn2PerInstance) {
  std::vector<Tensor<double>> d(6, row({0.5, 0.5}));
  const int ids[] = {0, 1, 0, 1, 1, 0};
  EXPECT_NEAR(adv_loss(std::span<const Tensor<double>>(d), ids).item(), 6 * std::log(2.0), 1e-12);
}

TEST(AdvLoss, PerfectDiscriminatorGivesZero) {
  std::vector<Tensor<double>> d{row({1.0, 0.0}), row({0.0, 1.0})};
  const int ids[] = {0, 1};
  EXPECT_EQ(adv_loss(std::span<const Tensor<double>>(d), ids).item(), 0.0);
}

TEST(DiffLoss, OrthogonalColumnsGiveZero) {
  auto p = Tensor<double>::from({2, 2}, {1, 0, 0, 0});
  auto s = Tensor<double>::from({2, 2}, {0, 0, 0, 1});
  EXPECT_EQ(diff_term(p, s).item(), 0.0);
}

TEST(DiffLoss, IdentityPairGivesTwo) {
  auto i = Tensor<double>::from({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(diff_term(i, i).item(), 2.0);
}

TEST(DiffLoss, MatchesElementwiseOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = oracle::random_tensor({5, 3}, rng), s = oracle::random_tensor({5, 3}, rng);
    const double expected = oracle::naive_diff_term(oracle::to_matrix(p), oracle::to_matrix(s));
    EXPECT_NEAR(diff_term(p, s).item(), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(DiffLoss, BatchIsMeanOverSentences) {
  Rng rng(3);
  std::vector<Tensor<double>> ps, ss;
  double total = 0.0;
  for (std::size_t n : {2u, 4u, 7u}) {
    ps.push_back(oracle::random_tensor({n, 3}, rng));
    ss.push_back(oracle::random_tensor({n, 3}, rng));
    total += oracle::naive_diff_term(oracle::to_matrix(ps.back()), oracle::to_matrix(ss.back()));
  }
  EXPECT_NEAR(diff_loss(std::span<const Tensor<double>>(ps), std::span<const Tensor<double>>(ss)).item(), total / 3,
              1e-12);
}

TEST(DiffLoss, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  auto p = oracle::random_tensor({4, 3}, rng), s = oracle::random_tensor({4, 3}, rng);
  auto r = oracle::check_gradients({p, s}, [&] { return diff_term(p, s); });
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(TotalLoss, ZeroWeightsGiveTaskLossExactly) {
  const LossWeights w{0.0, 0.0};
  EXPECT_EQ(total_loss(scalar(0.731), scalar(5.0), scalar(9.0), w).item(), 0.731);
}

TEST(TotalLoss, DefaultCoefficientsExample) {
  EXPECT_NEAR(total_loss(scalar(1.0), scalar(2.0), scalar(3.0), LossWeights{}).item(), 1.13, 1e-12);
}

TEST(TotalLoss, LinearInEachTerm) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double t = rng.uniform(0, 5), a = rng.uniform(0, 5), d = rng.uniform(0, 50);
    const LossWeights w{rng.uniform(0.01, 0.1), rng.uniform(0.01, 0.1)};
    EXPECT_NEAR(total_loss(scalar(t), scalar(a), scalar(d), w).item(), t + w.lambda * a + w.beta * d, 1e-12);
  }
}

TEST(TotalLoss, NonFiniteTermIsNamed) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  try {
    total_loss(scalar(1.0), scalar(nan), scalar(0.0), LossWeights{});
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("adv"), std::string::npos) << e.what();
  }
  EXPECT_THROW(total_loss(scalar(inf), scalar(0.0), scalar(0.0), LossWeights{}), DivergenceError);
  EXPECT_THROW(total_loss(scalar(0.0), scalar(0.0), scalar(-inf), LossWeights{}), DivergenceError);
}

TEST(LossWeights, NegativeCoefficientIsConfigError) {
  EXPECT_THROW((LossWeights{-0.1, 0.01}.validate()), ConfigError);
  EXPECT_THROW((LossWeights{0.05, -1.0}.validate()), ConfigError);
  EXPECT_NO_THROW(LossWeights{}.validate());
}

TEST(WeightedF1, PerfectPredictionsScoreOne) {
  const int labels[] = {0, 1, 2, 2, 1};
  auto r = classification_report(ConfusionMatrix(labels, labels, 3));
  EXPECT_EQ(r.weighted_f1, 1.0);
  EXPECT_EQ(r.weighted_precision, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(WeightedF1, HandComputedTwoClassCase) {
  // gold 0 0 0 1, pred 0 0 1 1: class 0 P=1 R=2/3, class 1 P=1/2 R=1
  const int gold[] = {0, 0, 0, 1}, pred[] = {0, 0, 1, 1};
  auto r = classification_report(ConfusionMatrix(gold, pred, 2));
  EXPECT_NEAR(r.f1[0], 0.8, 1e-15);
  EXPECT_NEAR(r.f1[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.weighted_f1, 0.75 * 0.8 + 0.25 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.weighted_precision, 0.75 + 0.125, 1e-15);
  EXPECT_NEAR(r.weighted_recall, 0.75, 1e-15);
}

TEST(WeightedF1, UnpredictedLabelScoresZero) {
  const int gold[] = {0, 1, 2}, pred[] = {0, 0, 0};
  auto r = classification_report(ConfusionMatrix(gold, pred, 3));
  EXPECT_EQ(r.precision[1], 0.0);
  EXPECT_EQ(r.f1[2], 0.0);
  EXPECT_TRUE(std::isfinite(r.weighted_f1));
}

std::pair<std::vector<int>, std::vector<int>> expand(const std::vector<std::vector<int>>& cm) {
  std::vector<int> gold, pred;
  for (std::size_t g = 0; g < cm.size(); ++g)
    for (std::size_t p = 0; p < cm.size(); ++p)
      for (int c = 0; c < cm[g][p]; ++c) {
        gold.push_back(static_cast<int>(g));
        pred.push_back(static_cast<int>(p));
      }
  return {gold, pred};
}

TEST(WeightedF1, ConstructedMatrixFallsOutsidePrecisionRecallInterval) {
  const std::vector<std::vector<int>> cm{{1, 4, 4}, {1, 3, 0}, {3, 2, 4}};
  auto [gold, pred] = expand(cm);
  auto r = classification_report(ConfusionMatrix(gold, pred, 3));
  auto o = oracle::naive_weighted_scores(gold, pred, 3);
  EXPECT_NEAR(r.weighted_f1, o.f1, 1e-12);
  EXPECT_LT(r.weighted_f1, std::min(r.weighted_precision, r.weighted_recall));
}

TEST(WeightedF1, MatchesOracleOnRandomMatrices) {
  Rng rng(6);
  std::size_t outside = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.below(4);
    std::vector<int> gold, pred;
    const std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(static_cast<int>(rng.below(k)));
      pred.push_back(rng.bernoulli(0.4) ? gold.back() : static_cast<int>(rng.below(k)));
    }
    auto r = classification_report(ConfusionMatrix(gold, pred, k));
    auto o = oracle::naive_weighted_scores(gold, pred, k);
    ASSERT_NEAR(r.weighted_precision, o.precision, 1e-9);
    ASSERT_NEAR(r.weighted_recall, o.recall, 1e-9);
    ASSERT_NEAR(r.weighted_f1, o.f1, 1e-9);
    outside += r.weighted_f1 < std::min(o.precision, o.recall) || r.weighted_f1 > std::max(o.precision, o.recall);
  }
  EXPECT_GT(outside, 0u);
}

TEST(ConfusionMatrix, RejectsOutOfRangeLabels) {
  ConfusionMatrix cm(2);
  EXPECT_THROW(cm.add(2, 0), Error);
  EXPECT_THROW(cm.add(0, -1), Error);
}

Tokens toks(std::initializer_list<const char*> xs) { return Tokens(xs.begin(), xs.end()); }

TEST(NormalizationScore, CopyOfCleanInputIsPerfect) {
  NormalizationScorer s;
  auto t = toks({"you", "are", "ok"});
  s.add(t, t, t);
  auto r = s.report();
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(r.token_accuracy, 1.0);
  EXPECT_EQ(r.sentence_accuracy, 1.0);
}

TEST(NormalizationScore, EditsAreCountedAgainstTheRawInput) {
  NormalizationScorer s;
  // gold edits: u->you, r->are; predicted edits: u->you, ok->okay
  s.add(toks({"u", "r", "ok"}), toks({"you", "r", "okay"}), toks({"you", "are", "ok"}));
  auto r = s.report();
  EXPECT_EQ(r.gold_edits, 2u);
  EXPECT_EQ(r.predicted_edits, 2u);
  EXPECT_EQ(r.correct_edits, 1u);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.token_accuracy, 1.0 / 3.0);
  EXPECT_EQ(r.sentence_accuracy, 0.0);
}

TEST(NormalizationScore, LengthDifferencesCountAgainstAccuracy) {
  NormalizationScorer s;
  s.add(toks({"idk"}), toks({"i", "do"}), toks({"i", "do", "not", "know"}));
  auto r = s.report();
  EXPECT_DOUBLE_EQ(r.token_accuracy, 0.5);
  EXPECT_EQ(r.gold_edits, 4u);
  EXPECT_EQ(r.correct_edits, 2u);
}

}  // namespace
}  // namespace aldnorm
