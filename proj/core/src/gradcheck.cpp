// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "aldnorm/vocabulary.hpp"

namespace aldnorm {

namespace {

EncodedSentence random_sentence(std::size_t n, const ModelConfig& c, Rng& rng) {
  EncodedSentence s;
  const auto lo = static_cast<std::uint64_t>(Vocabulary::kReserved);
  for (std::size_t i = 0; i < n; ++i) {
    s.words.push_back(static_cast<int>(lo + rng.below(c.word_vocab - lo)));
    std::vector<int> chars(1 + rng.below(4));
    for (auto& ch : chars) ch = static_cast<int>(lo + rng.below(c.char_vocab - lo));
    s.chars.push_back(std::move(chars));
  }
  return s;
}

struct Terms {
  double task = 0.0, adv = 0.0, dif = 0.0;
};

struct Problem {
  EncodedSentence ald_sentence;
  int label = 0;
  EncodedSentence tn_sentence;
  std::vector<int> target;
};

// Builds both turns. With `parts` set, returns the per-term values instead of
// a recorded loss.
Tensor<double> turn_losses(const JointModel<double>& model, const Problem& p, const LossWeights& w, Terms* parts) {
  ForwardContext ctx;
  auto fa = model.features(p.ald_sentence, TaskId::ald, ctx);
  auto ft = model.features(p.tn_sentence, TaskId::tn, ctx);
  std::vector<Tensor<double>> dist_a{model.classify(fa, ctx)};
  std::vector<Tensor<double>> disc_a{model.discriminate(fa.shared, true, ctx)};
  std::vector<Tensor<double>> disc_t{model.discriminate(ft.shared, true, ctx)};
  const int label[] = {p.label}, ald_id[] = {static_cast<int>(TaskId::ald)}, tn_id[] = {static_cast<int>(TaskId::tn)};
  auto task_a = task_loss<double>(dist_a, label);
  auto adv_a = adv_loss<double>(disc_a, ald_id);
  auto dif_a = diff_term(fa.priv, fa.shared);
  auto task_t = model.normalization_loss(ft, p.target, ctx);
  auto adv_t = adv_loss<double>(disc_t, tn_id);
  auto dif_t = diff_term(ft.priv, ft.shared);
  if (parts != nullptr) {
    parts->task = task_a.item() + task_t.item();
    parts->adv = adv_a.item() + adv_t.item();
    parts->dif = dif_a.item() + dif_t.item();
  }
  return add(total_loss(task_a, adv_a, dif_a, w), total_loss(task_t, adv_t, dif_t, w));
}

// Parameters upstream of the reversal receive the negated adversarial
// gradient.
bool upstream_of_reversal(ParamGroup g) { return g == ParamGroup::embeddings || g == ParamGroup::shared; }

}  // namespace

bool GradcheckReport::passed() const { return failing().empty() && groups.size() == kAllGroups.size(); }

std::vector<ParamGroup> GradcheckReport::failing() const {
  std::vector<ParamGroup> out;
  for (const auto& g : groups) {
    if (!(g.max_relative_error < tolerance) || g.elements == 0) out.push_back(g.group);
  }
  return out;
}

GradcheckReport run_gradcheck(const ModelConfig& config, const GradcheckConfig& options) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  if (options.sequence_length == 0 || options.sequence_length > config.max_len || options.target_length == 0 ||
      options.target_length > config.max_len) {
    throw ConfigError("gradcheck: sequence lengths must lie in [1, max_len]");
  }
  JointModel<double> model(config, options.seed);
  Rng rng(options.seed + 1);
  Problem p;
  p.ald_sentence = random_sentence(options.sequence_length, config, rng);
  p.label = static_cast<int>(rng.below(config.num_labels));
  p.tn_sentence = random_sentence(options.sequence_length, config, rng);
  const auto lo = static_cast<std::uint64_t>(Vocabulary::kReserved);
  for (std::size_t i = 0; i < options.target_length; ++i) {
    p.target.push_back(static_cast<int>(lo + rng.below(config.target_vocab - lo)));
  }

  auto params = model.parameters();
  zero_grads(params);
  {
    Tape<double> tape;
    Tensor<double> loss;
    {
      TapeScope<double> scope(tape);
      loss = turn_losses(model, p, options.weights, nullptr);
    }
    tape.backward(loss);
  }

  GradcheckReport report;
  report.tolerance = options.tolerance;
  for (auto group : kAllGroups) {
    GroupGradcheck g;
    g.group = group;
    const double adv_sign = upstream_of_reversal(group) ? -1.0 : 1.0;
    auto objective = [&] {
      Terms t;
      turn_losses(model, p, options.weights, &t);
      return t.task + adv_sign * options.weights.lambda * t.adv + options.weights.beta * t.dif;
    };
    for (auto& param : model.parameters(group)) {
      auto values = param.tensor.mutable_values();
      const std::vector<double> analytic = param.tensor.has_grad()
                                               ? std::vector<double>(param.tensor.grad().begin(), param.tensor.grad().end())
                                               : std::vector<double>(values.size(), 0.0);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + options.step;
        const double up = objective();
        values[i] = saved - options.step;
        const double down = objective();
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * options.step);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
        const double err = std::abs(analytic[i] - numeric) / denom;
        if (g.worst_parameter.empty() || err > g.max_relative_error) {
          g.max_relative_error = err;
          g.worst_parameter = param.name;
        }
        g.max_abs_gradient = std::max(g.max_abs_gradient, std::abs(analytic[i]));
        ++g.elements;
      }
    }
    report.groups.push_back(g);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_gradcheck(std::ostream& out, const GradcheckReport& report) {
  char buf[64];
  for (const auto& g : report.groups) {
    std::snprintf(buf, sizeof buf, "%.3e", g.max_relative_error);
    out << group_name(g.group) << '\t' << buf << '\t' << g.elements << '\t'
        << (g.max_relative_error < report.tolerance && g.elements > 0 ? "ok" : "FAIL") << '\t' << g.worst_parameter
        << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.3g", report.tolerance);
  out << "summary\t" << (report.passed() ? "pass" : "fail") << "\ttolerance=" << buf;
  std::snprintf(buf, sizeof buf, "%.2f", report.seconds);
  out << "\tseconds=" << buf << '\n';
}

}  // namespace aldnorm
