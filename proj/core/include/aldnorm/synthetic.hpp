// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aldnorm/corpus.hpp"

namespace aldnorm {

// Knobs for the synthetic ALD/TN corpora. Every word is a random lowercase
// string drawn from the seed.
struct SyntheticSpec {
  std::vector<std::string> labels{"oag", "cag", "nag"};
  std::size_t cues_per_class = 4;
  std::size_t filler_words = 30;
  std::size_t ald_markers = 2;
  std::size_t tn_markers = 2;
  double marker_rate = 1.0;         // chance a sentence carries its task's marker
  std::size_t dictionary_size = 20;  // slang entries; cue words are covered first when corrupt_cues
  bool corrupt_cues = true;
  std::size_t min_len = 4, max_len = 8;
  std::size_t min_cues = 1, max_cues = 2;

  std::size_t ald_train = 60, ald_dev = 30, ald_test = 30;
  std::size_t tn_train = 100, tn_dev = 30, tn_test = 30;

  double ald_train_corruption = 0.0;  // per covered word, ALD train split
  double ald_eval_corruption = 0.0;   // per covered word, ALD dev/test splits
  double tn_corruption = 0.5;         // per covered word, TN raw side

  void validate() const;
};

struct SyntheticCorpora {
  ClassificationCorpus ald_train, ald_dev, ald_test;
  NormalizationCorpus tn_train, tn_dev, tn_test;
  SlangDictionary dictionary;  // slang -> clean word
  std::vector<std::vector<std::string>> cues;  // per label
  std::vector<std::string> filler, ald_markers, tn_markers;
};

SyntheticCorpora generate_synthetic(std::uint64_t seed, const SyntheticSpec& spec);

}  // namespace aldnorm
