// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include <benchmark/benchmark.h>

#include <vector>

#include "aldnorm/attention.hpp"
#include "aldnorm/dataset.hpp"
#include "aldnorm/encoder.hpp"
#include "aldnorm/synthetic.hpp"
#include "aldnorm/training.hpp"

namespace aldnorm {
namespace {

Tensor<float> random_tensor(Shape shape, Rng& rng, bool requires_grad = false) {
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor<float>::from(std::move(shape), std::move(v), requires_grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto a = random_tensor({n, n}, rng);
  auto b = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_ScaledDotAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  auto q = random_tensor({n, 32}, rng);
  auto k = random_tensor({n, 32}, rng);
  auto v = random_tensor({n, 32}, rng);
  AttentionMask mask;
  mask.causal = true;
  for (auto _ : state) benchmark::DoNotOptimize(scaled_dot_attention(q, k, v, mask));
}
BENCHMARK(BM_ScaledDotAttention)->Arg(8)->Arg(32)->Arg(64);

EncoderConfig encoder_config() {
  EncoderConfig c;
  c.d_in = 64;
  c.d_model = 64;
  c.heads = 4;
  c.layers = 2;
  c.max_len = 64;
  return c;
}

void BM_EncoderForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  EncoderStack<float> stack(EncoderRole::shared, encoder_config(), rng);
  auto x = random_tensor({n, 64}, rng);
  ForwardContext ctx;
  for (auto _ : state) benchmark::DoNotOptimize(stack.encode(x, {}, ctx));
}
BENCHMARK(BM_EncoderForward)->Arg(8)->Arg(32);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  EncoderStack<float> stack(EncoderRole::shared, encoder_config(), rng);
  auto x = random_tensor({n, 64}, rng, true);
  ForwardContext ctx;
  for (auto _ : state) {
    Tape<float> tape;
    Tensor<float> loss;
    {
      TapeScope<float> scope(tape);
      loss = sum(stack.encode(x, {}, ctx));
    }
    tape.backward(loss);
    benchmark::DoNotOptimize(x.grad().data());
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(8)->Arg(32);

// One joint epoch over a small synthetic corpus: alternating TN and ALD turns.
void BM_JointTrainEpoch(benchmark::State& state) {
  SyntheticSpec spec;
  spec.ald_train = 32;
  spec.tn_train = 32;
  const auto corpora = generate_synthetic(1, spec);
  const auto lexicon = build_lexicon(&corpora.ald_train, &corpora.tn_train);
  TaskData data;
  data.ald_train = encode_classification(corpora.ald_train, lexicon, 16);
  data.tn_train = encode_normalization(corpora.tn_train, lexicon, 16);
  data.ald_dev = encode_classification(corpora.ald_dev, lexicon, 16);
  data.tn_dev = encode_normalization(corpora.tn_dev, lexicon, 16);
  ModelConfig mc;
  mc.d_model = 16;
  mc.d_word = 16;
  mc.d_sbw = 8;
  mc.d_pe = 4;
  mc.d_char = 8;
  mc.classifier_hidden = 16;
  mc.discriminator_hidden = 16;
  mc.max_len = 16;
  mc = sized_config(mc, lexicon);
  TrainConfig tc;
  tc.warm_start = false;
  tc.max_epochs = 1;
  tc.tn_batch = 8;
  tc.ald_batch = 8;
  tc.evaluate_tn_f1 = false;
  for (auto _ : state) {
    state.PauseTiming();
    JointModel<float> model(mc, 1);
    Trainer<float> trainer(model, tc, &lexicon.targets);
    state.ResumeTiming();
    benchmark::DoNotOptimize(trainer.train(data));
  }
}
BENCHMARK(BM_JointTrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace aldnorm

BENCHMARK_MAIN();
