// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <filesystem>

#include "aldnorm/corpus.hpp"
#include "aldnorm/training.hpp"

namespace aldnorm {

// Vocabularies and label inventory shared by training and inference.
struct Lexicon {
  Vocabulary words;
  Vocabulary chars;
  Vocabulary targets;
  std::vector<std::string> labels;

  // words.vocab, chars.vocab, targets.vocab, labels.txt
  void save(const std::filesystem::path& dir) const;
  static Lexicon load(const std::filesystem::path& dir);

  bool operator==(const Lexicon&) const = default;
};

// Source words and characters come from every given training corpus; target
// words from the normalized side; labels from the classification inventory.
Lexicon build_lexicon(const ClassificationCorpus* ald, const NormalizationCorpus* tn);

// Fills the vocabulary sizes and label count of `base`.
ModelConfig sized_config(ModelConfig base, const Lexicon& lexicon);

struct EncodeStats {
  std::size_t truncated = 0;  // sentences cut to max_len
};

std::vector<AldExample> encode_classification(const ClassificationCorpus& corpus, const Lexicon& lexicon,
                                              std::size_t max_len, EncodeStats* stats = nullptr);
std::vector<TnExample> encode_normalization(const NormalizationCorpus& corpus, const Lexicon& lexicon,
                                            std::size_t max_len, EncodeStats* stats = nullptr);
EncodedSentence encode_tokens(const Tokens& tokens, const Lexicon& lexicon, std::size_t max_len,
                              EncodeStats* stats = nullptr);

}  // namespace aldnorm
