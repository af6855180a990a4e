// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <span>
#include <string>
#include <vector>

#include "aldnorm/ops.hpp"
#include "aldnorm/optim.hpp"
#include "aldnorm/vocabulary.hpp"

namespace aldnorm {

// A sentence after vocabulary lookup: one word id and one character-id
// sequence per token.
struct EncodedSentence {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;

  std::size_t size() const noexcept { return words.size(); }
};

EncodedSentence encode_sentence(std::span<const std::string> tokens, const Vocabulary& words,
                                const Vocabulary& chars);

struct EmbeddingConfig {
  std::size_t word_vocab = 0;
  std::size_t char_vocab = 0;
  std::size_t d_word = 64;
  std::size_t d_char = 16;
  std::size_t d_sbw = 32;
  std::size_t char_width = 3;
  std::size_t d_pe = 16;
  std::size_t max_len = 64;

  std::size_t d_in() const noexcept { return d_word + d_sbw + d_pe; }
};

// Per-token input representation: [word row; char-CNN subword vector;
// position row]. The word table stands in for a contextual encoder and is
// trained from scratch.
template <typename T>
class Embeddings {
 public:
  Embeddings(const EmbeddingConfig& config, Rng& rng);

  const EmbeddingConfig& config() const noexcept { return config_; }
  std::size_t d_in() const noexcept { return config_.d_in(); }

  Tensor<T> embed_sequence(const EncodedSentence& sentence) const;
  Tensor<T> char_cnn(std::span<const int> char_ids) const;
  Tensor<T> position_embedding(std::size_t t) const;

  // Keeps the PAD word row at exactly zero; call after backward, before the
  // optimizer step.
  void zero_pad_grad();

  void collect(ParameterList<T>& out, const std::string& prefix) const;

  const Tensor<T>& word_table() const noexcept { return word_table_; }
  const Tensor<T>& char_table() const noexcept { return char_table_; }
  const Tensor<T>& char_filters() const noexcept { return char_filters_; }
  const Tensor<T>& char_bias() const noexcept { return char_bias_; }
  const Tensor<T>& position_table() const noexcept { return position_table_; }

 private:
  EmbeddingConfig config_;
  Tensor<T> word_table_;
  Tensor<T> char_table_;
  Tensor<T> char_filters_;
  Tensor<T> char_bias_;
  Tensor<T> position_table_;
};

}  // namespace aldnorm
