// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <span>
#include <string>
#include <vector>

namespace aldnorm {

// counts[gold][predicted]
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels);
  ConfusionMatrix(std::span<const int> gold, std::span<const int> predicted, std::size_t labels);

  void add(int gold, int predicted, std::size_t count = 1);
  std::size_t labels() const noexcept { return labels_; }
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * labels_ + predicted]; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t labels_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

struct ClassificationReport {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
};

// Per-label scores plus support-weighted averages. A label with no
// predictions (or no gold instances) scores 0 on the undefined side.
ClassificationReport classification_report(const ConfusionMatrix& cm);

struct NormalizationReport {
  double precision = 0.0;  // over (position, token) edits
  double recall = 0.0;
  double f1 = 0.0;
  double token_accuracy = 0.0;
  double sentence_accuracy = 0.0;
  std::size_t predicted_edits = 0;
  std::size_t gold_edits = 0;
  std::size_t correct_edits = 0;
};

// An edit is a (position, token) pair whose token differs from the raw input
// at that position. Precision and recall compare predicted edits with gold
// edits; when neither side edits anything both are 1. Token accuracy counts
// position-wise matches over max(|pred|, |gold|).
class NormalizationScorer {
 public:
  void add(std::span<const std::string> raw, std::span<const std::string> predicted,
           std::span<const std::string> gold);
  NormalizationReport report() const;

 private:
  std::size_t predicted_edits_ = 0, gold_edits_ = 0, correct_edits_ = 0;
  std::size_t matched_tokens_ = 0, token_slots_ = 0;
  std::size_t sentences_ = 0, exact_sentences_ = 0;
};

}  // namespace aldnorm
