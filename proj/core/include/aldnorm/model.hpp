// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aldnorm/decoders.hpp"
#include "aldnorm/discriminator.hpp"
#include "aldnorm/embeddings.hpp"
#include "aldnorm/encoder.hpp"

namespace aldnorm {

struct ModelConfig {
  std::size_t word_vocab = 0;
  std::size_t char_vocab = 0;
  std::size_t target_vocab = 0;
  std::size_t num_labels = 0;

  std::size_t d_word = 64;
  std::size_t d_char = 16;
  std::size_t d_sbw = 32;
  std::size_t char_width = 3;
  std::size_t d_pe = 16;
  std::size_t max_len = 64;

  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t ffn_multiplier = 4;
  std::size_t shared_layers = 2;
  std::size_t ald_layers = 2;
  std::size_t tn_layers = 3;
  std::size_t decoder_layers = 3;
  std::size_t classifier_hidden = 64;
  std::size_t discriminator_hidden = 64;
  std::size_t discriminator_layers = 2;

  // d_model=8, h=2, every stack at most two layers deep.
  static ModelConfig tiny(std::size_t word_vocab, std::size_t char_vocab, std::size_t target_vocab,
                          std::size_t num_labels);

  void validate() const;
  EmbeddingConfig embedding() const;
  EncoderConfig encoder(EncoderRole role) const;
  DecoderConfig decoder() const;

  // Stable "key=value" listing of every field; the fingerprint hashes it.
  std::string canonical() const;
  std::uint64_t fingerprint() const;

  bool operator==(const ModelConfig&) const = default;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

enum class ParamGroup { embeddings, shared, ald_private, tn_private, classifier, normalizer, discriminator };

inline constexpr std::array<ParamGroup, 7> kAllGroups{ParamGroup::embeddings, ParamGroup::shared,
                                                      ParamGroup::ald_private, ParamGroup::tn_private,
                                                      ParamGroup::classifier, ParamGroup::normalizer,
                                                      ParamGroup::discriminator};

std::string_view group_name(ParamGroup group);

template <typename T>
struct SentenceFeatures {
  Tensor<T> input;     // n x d_in
  Tensor<T> shared;    // n x d_model
  Tensor<T> priv;      // n x d_model, from the task's private encoder
};

struct AttentionCapture {
  AttentionRecord shared;
  AttentionRecord ald_private;
  AttentionRecord tn_private;
};

// Shared-private network: one embedding block, three encoder stacks, the two
// task heads and the task discriminator.
template <typename T>
class JointModel {
 public:
  JointModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }

  SentenceFeatures<T> features(const EncodedSentence& sentence, TaskId task, ForwardContext& ctx) const;

  // 1 x labels probability row.
  Tensor<T> classify(const SentenceFeatures<T>& f, ForwardContext& ctx) const;
  Tensor<T> classify(const EncodedSentence& sentence, ForwardContext& ctx) const;

  Tensor<T> memory(const SentenceFeatures<T>& f) const;
  Tensor<T> normalization_loss(const SentenceFeatures<T>& f, std::span<const int> target, ForwardContext& ctx) const;
  DecodeResult normalize(const EncodedSentence& sentence, std::size_t max_len, bool keep_trace = false) const;

  // 1 x 2 distribution over TaskId.
  Tensor<T> discriminate(const Tensor<T>& shared, bool reverse, ForwardContext& ctx) const;

  // Runs all three encoders with dropout disabled and captures their weights.
  AttentionCapture capture_attention(const EncodedSentence& sentence) const;

  ParameterList<T> parameters() const;
  ParameterList<T> parameters(ParamGroup group) const;
  ParameterList<T> parameters(std::span<const ParamGroup> groups) const;

  void zero_pad_grad() { embeddings_.zero_pad_grad(); }

  Embeddings<T>& embeddings() noexcept { return embeddings_; }
  const Embeddings<T>& embeddings() const noexcept { return embeddings_; }
  const EncoderStack<T>& encoder(EncoderRole role) const;
  ClassifierHead<T>& classifier() noexcept { return classifier_; }
  NormalizerDecoder<T>& normalizer() noexcept { return normalizer_; }
  TaskDiscriminator<T>& discriminator() noexcept { return discriminator_; }

 private:
  ModelConfig config_;
  Rng init_rng_;
  Embeddings<T> embeddings_;
  EncoderStack<T> shared_;
  EncoderStack<T> ald_private_;
  EncoderStack<T> tn_private_;
  ClassifierHead<T> classifier_;
  NormalizerDecoder<T> normalizer_;
  TaskDiscriminator<T> discriminator_;
};

}  // namespace aldnorm
