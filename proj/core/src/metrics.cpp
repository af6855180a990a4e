// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/metrics.hpp"

#include <algorithm>

#include "aldnorm/errors.hpp"

namespace aldnorm {

ConfusionMatrix::ConfusionMatrix(std::size_t labels) : labels_(labels), counts_(labels * labels, 0) {
  if (labels == 0) throw ConfigError("confusion matrix: zero labels");
}

ConfusionMatrix::ConfusionMatrix(std::span<const int> gold, std::span<const int> predicted, std::size_t labels)
    : ConfusionMatrix(labels) {
  if (gold.size() != predicted.size()) {
    throw ShapeError("confusion matrix: " + std::to_string(gold.size()) + " gold labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) add(gold[i], predicted[i]);
}

void ConfusionMatrix::add(int gold, int predicted, std::size_t count) {
  auto valid = [&](int v) { return v >= 0 && static_cast<std::size_t>(v) < labels_; };
  if (!valid(gold) || !valid(predicted)) {
    throw RangeError("confusion matrix: label pair (" + std::to_string(gold) + ", " + std::to_string(predicted) +
                     ") outside " + std::to_string(labels_) + " labels");
  }
  counts_[static_cast<std::size_t>(gold) * labels_ + static_cast<std::size_t>(predicted)] += count;
  total_ += count;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const std::size_t K = cm.labels();
  ClassificationReport r;
  r.precision.assign(K, 0.0);
  r.recall.assign(K, 0.0);
  r.f1.assign(K, 0.0);
  r.support.assign(K, 0);
  std::size_t correct = 0;
  for (std::size_t l = 0; l < K; ++l) {
    std::size_t predicted = 0, gold = 0;
    for (std::size_t o = 0; o < K; ++o) {
      predicted += cm.at(o, l);
      gold += cm.at(l, o);
    }
    const auto tp = static_cast<double>(cm.at(l, l));
    correct += cm.at(l, l);
    r.support[l] = gold;
    r.precision[l] = predicted ? tp / static_cast<double>(predicted) : 0.0;
    r.recall[l] = gold ? tp / static_cast<double>(gold) : 0.0;
    const double pr = r.precision[l] + r.recall[l];
    r.f1[l] = pr > 0.0 ? 2.0 * r.precision[l] * r.recall[l] / pr : 0.0;
  }
  const double n = static_cast<double>(cm.total());
  if (n > 0.0) {
    for (std::size_t l = 0; l < K; ++l) {
      const double w = static_cast<double>(r.support[l]) / n;
      r.weighted_precision += w * r.precision[l];
      r.weighted_recall += w * r.recall[l];
      r.weighted_f1 += w * r.f1[l];
    }
    r.accuracy = static_cast<double>(correct) / n;
  }
  return r;
}

void NormalizationScorer::add(std::span<const std::string> raw, std::span<const std::string> predicted,
                              std::span<const std::string> gold) {
  auto is_edit = [&](std::size_t i, const std::string& tok) { return i >= raw.size() || raw[i] != tok; };
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!is_edit(i, predicted[i])) continue;
    ++predicted_edits_;
    if (i < gold.size() && gold[i] == predicted[i]) ++correct_edits_;
  }
  for (std::size_t i = 0; i < gold.size(); ++i) gold_edits_ += is_edit(i, gold[i]) ? 1 : 0;
  const std::size_t common = std::min(predicted.size(), gold.size());
  for (std::size_t i = 0; i < common; ++i) matched_tokens_ += predicted[i] == gold[i] ? 1 : 0;
  token_slots_ += std::max(predicted.size(), gold.size());
  ++sentences_;
  if (predicted.size() == gold.size() && std::equal(predicted.begin(), predicted.end(), gold.begin())) {
    ++exact_sentences_;
  }
}

NormalizationReport NormalizationScorer::report() const {
  NormalizationReport r;
  r.predicted_edits = predicted_edits_;
  r.gold_edits = gold_edits_;
  r.correct_edits = correct_edits_;
  if (predicted_edits_ == 0 && gold_edits_ == 0) {
    r.precision = r.recall = r.f1 = 1.0;
  } else {
    r.precision = predicted_edits_ ? static_cast<double>(correct_edits_) / static_cast<double>(predicted_edits_) : 0.0;
    r.recall = gold_edits_ ? static_cast<double>(correct_edits_) / static_cast<double>(gold_edits_) : 0.0;
    const double pr = r.precision + r.recall;
    r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  }
  r.token_accuracy = token_slots_ ? static_cast<double>(matched_tokens_) / static_cast<double>(token_slots_) : 1.0;
  r.sentence_accuracy = sentences_ ? static_cast<double>(exact_sentences_) / static_cast<double>(sentences_) : 1.0;
  return r;
}

}  // namespace aldnorm
