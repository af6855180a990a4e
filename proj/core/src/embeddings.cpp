// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#include "aldnorm/embeddings.hpp"

#include <numeric>

namespace aldnorm {

EncodedSentence encode_sentence(std::span<const std::string> tokens, const Vocabulary& words,
                                const Vocabulary& chars) {
  EncodedSentence out;
  out.words = words.encode(tokens);
  out.chars.reserve(tokens.size());
  for (const auto& tok : tokens) {
    auto cps = codepoints(tok);
    out.chars.push_back(chars.encode(cps));
  }
  return out;
}

template <typename T>
Embeddings<T>::Embeddings(const EmbeddingConfig& config, Rng& rng) : config_(config) {
  if (config.word_vocab <= Vocabulary::kReserved - 1 || config.char_vocab <= Vocabulary::kReserved - 1) {
    throw ConfigError("embeddings: vocabularies must include the reserved ids");
  }
  if (config.d_word == 0 || config.d_char == 0 || config.d_sbw == 0 || config.d_pe == 0 ||
      config.char_width == 0 || config.max_len == 0) {
    throw ConfigError("embeddings: all dimensions must be positive");
  }
  word_table_ = make_weight<T>(config.word_vocab, config.d_word, rng);
  for (std::size_t j = 0; j < config.d_word; ++j) word_table_.mutable_values()[j] = T(0);
  char_table_ = make_weight<T>(config.char_vocab, config.d_char, rng);
  char_filters_ = make_weight<T>(config.char_width * config.d_char, config.d_sbw, rng);
  char_bias_ = make_constant<T>({config.d_sbw}, T(0));
  position_table_ = make_weight<T>(config.max_len, config.d_pe, rng);
}

template <typename T>
Tensor<T> Embeddings<T>::char_cnn(std::span<const int> char_ids) const {
  if (char_ids.empty()) throw ContractError("char_cnn: empty character sequence");
  for (int c : char_ids) {
    if (c < 0 || static_cast<std::size_t>(c) >= config_.char_vocab) {
      throw VocabularyError("char_cnn: character id " + std::to_string(c) + " outside vocabulary of " +
                            std::to_string(config_.char_vocab));
    }
  }
  auto chars = gather_rows(char_table_, char_ids);
  return tanh(conv1d_maxpool(chars, char_filters_, char_bias_, config_.char_width));
}

template <typename T>
Tensor<T> Embeddings<T>::position_embedding(std::size_t t) const {
  if (t >= config_.max_len) {
    throw RangeError("position " + std::to_string(t) + " outside table of " + std::to_string(config_.max_len));
  }
  const int id = static_cast<int>(t);
  return gather_rows(position_table_, std::span<const int>(&id, 1));
}

template <typename T>
Tensor<T> Embeddings<T>::embed_sequence(const EncodedSentence& sentence) const {
  const std::size_t n = sentence.size();
  if (n == 0) throw ContractError("embed_sequence: empty sentence");
  if (n > config_.max_len) {
    throw SequenceLengthError("sequence of " + std::to_string(n) + " tokens exceeds maximum length " +
                              std::to_string(config_.max_len));
  }
  if (sentence.chars.size() != n) {
    throw ContractError("embed_sequence: " + std::to_string(sentence.chars.size()) +
                        " character sequences for " + std::to_string(n) + " tokens");
  }
  for (int w : sentence.words) {
    if (w < 0 || static_cast<std::size_t>(w) >= config_.word_vocab) {
      throw VocabularyError("word id " + std::to_string(w) + " outside vocabulary of " +
                            std::to_string(config_.word_vocab));
    }
  }
  auto words = gather_rows(word_table_, sentence.words);
  std::vector<Tensor<T>> subwords;
  subwords.reserve(n);
  for (const auto& chars : sentence.chars) subwords.push_back(char_cnn(chars));
  auto sbw = concat<T>(std::span<const Tensor<T>>(subwords), 0);
  std::vector<int> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  auto pos = gather_rows(position_table_, positions);
  return concat({words, sbw, pos}, 1);
}

template <typename T>
void Embeddings<T>::zero_pad_grad() {
  if (!word_table_.has_grad()) return;
  auto g = word_table_.mutable_grad();
  for (std::size_t j = 0; j < config_.d_word; ++j) g[j] = T(0);
}

template <typename T>
void Embeddings<T>::collect(ParameterList<T>& out, const std::string& prefix) const {
  out.push_back({prefix + "word_table", word_table_});
  out.push_back({prefix + "char_table", char_table_});
  out.push_back({prefix + "char_filters", char_filters_});
  out.push_back({prefix + "char_bias", char_bias_});
  out.push_back({prefix + "position_table", position_table_});
}

template class Embeddings<float>;
template class Embeddings<double>;

}  // namespace aldnorm
